//! Bundle declarations, jet symbols and symmetric multi-indices.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use crate::error::{Error, Result};

pub const DEFAULT_MAX_ORDER: usize = 16;

/// A symmetric multi-index: a sorted list of base-variable indices.
/// `u_xy` and `u_yx` share one index, so the list is kept sorted.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(mut indices: Vec<u8>) -> Self {
        indices.sort_unstable();
        MultiIndex(indices)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[u8] {
        &self.0
    }

    /// The index extended by one more derivative direction.
    pub fn with(&self, i: u8) -> Self {
        let mut v = self.0.clone();
        let pos = v.partition_point(|&j| j <= i);
        v.insert(pos, i);
        MultiIndex(v)
    }

    /// Splits off the largest direction; `None` for the empty index.
    pub fn split_last(&self) -> Option<(MultiIndex, u8)> {
        let (&last, rest) = self.0.split_last()?;
        Some((MultiIndex(rest.to_vec()), last))
    }

    /// Splits off the smallest direction; `None` for the empty index.
    pub fn split_first(&self) -> Option<(u8, MultiIndex)> {
        let (&first, rest) = self.0.split_first()?;
        Some((first, MultiIndex(rest.to_vec())))
    }

    /// The sign (-1)^{|I|} carried by `(-D)_I`.
    pub fn sign(&self) -> i64 {
        if self.0.len().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A declared symbol. Jet symbols of order zero are the fiber variables
/// themselves. The derived `Ord` fixes the monomial order of the whole
/// engine: base variables, then jets (field-major, order-minor), then
/// parameters, in declaration order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Sym {
    Base(u8),
    Jet { field: u8, index: MultiIndex },
    Param(u8),
}

impl Sym {
    pub fn fiber(a: u8) -> Sym {
        Sym::Jet {
            field: a,
            index: MultiIndex::empty(),
        }
    }

    pub fn jet_parts(&self) -> Option<(u8, &MultiIndex)> {
        match self {
            Sym::Jet { field, index } => Some((*field, index)),
            _ => None,
        }
    }

    pub fn is_jet(&self) -> bool {
        matches!(self, Sym::Jet { .. })
    }
}

/// Declaration of base variables, fiber variables and parameters.
/// Declaration order fixes the monomial order and all rendering.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Bundle {
    base: Vec<String>,
    fiber: Vec<String>,
    params: Vec<String>,
    positive: BTreeSet<u8>,
    time: Option<u8>,
    max_order: usize,
}

impl Bundle {
    /// Parameter names may carry a documentation tag `>0` (e.g. `k>0`),
    /// which marks the parameter as positive for orientation reporting.
    /// A parameter named `t` is the time symbol.
    pub fn new(base: Vec<String>, fiber: Vec<String>, params: Vec<String>) -> Result<Bundle> {
        if base.is_empty() {
            return Err(Error::BadBundle(
                "at least one base variable required".into(),
            ));
        }
        if fiber.is_empty() {
            return Err(Error::BadBundle(
                "at least one fiber variable required".into(),
            ));
        }
        if base.len() > u8::MAX as usize || fiber.len() > u8::MAX as usize {
            return Err(Error::BadBundle("too many variables".into()));
        }
        let mut positive = BTreeSet::new();
        let mut names: Vec<String> = Vec::new();
        for (i, raw) in params.iter().enumerate() {
            let name = match raw.strip_suffix(">0") {
                Some(stem) => {
                    positive.insert(i as u8);
                    stem.trim().to_string()
                }
                None => raw.clone(),
            };
            names.push(name);
        }
        let mut seen = BTreeSet::new();
        for name in base.iter().chain(fiber.iter()).chain(names.iter()) {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::BadBundle(format!("invalid name `{name}`")));
            }
            if !name.chars().next().unwrap().is_ascii_alphabetic() {
                return Err(Error::BadBundle(format!("invalid name `{name}`")));
            }
            if !seen.insert(name.clone()) {
                return Err(Error::BadBundle(format!("duplicate name `{name}`")));
            }
        }
        let time = names.iter().position(|p| p == "t").map(|i| i as u8);
        Ok(Bundle {
            base,
            fiber,
            params: names,
            positive,
            time,
            max_order: DEFAULT_MAX_ORDER,
        })
    }

    pub fn with_max_order(mut self, max_order: usize) -> Bundle {
        self.max_order = max_order;
        self
    }

    pub fn n(&self) -> usize {
        self.base.len()
    }

    pub fn m(&self) -> usize {
        self.fiber.len()
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber
    }

    pub fn param_names(&self) -> &[String] {
        &self.params
    }

    pub fn time(&self) -> Option<Sym> {
        self.time.map(Sym::Param)
    }

    pub fn is_positive_param(&self, s: &Sym) -> bool {
        matches!(s, Sym::Param(i) if self.positive.contains(i))
    }

    /// A jet symbol, guarded by the jet-order limit.
    pub fn jet(&self, field: u8, index: MultiIndex) -> Result<Sym> {
        if (field as usize) >= self.fiber.len() {
            return Err(Error::DimensionMismatch(format!(
                "fiber index {field} out of range"
            )));
        }
        if index.order() > self.max_order {
            return Err(Error::JetOrderLimit {
                limit: self.max_order,
            });
        }
        Ok(Sym::Jet { field, index })
    }

    pub fn base_index(&self, name: &str) -> Option<u8> {
        self.base.iter().position(|b| b == name).map(|i| i as u8)
    }

    pub fn fiber_index(&self, name: &str) -> Option<u8> {
        self.fiber.iter().position(|f| f == name).map(|i| i as u8)
    }

    pub fn param_index(&self, name: &str) -> Option<u8> {
        self.params.iter().position(|p| p == name).map(|i| i as u8)
    }

    /// Resolves an identifier to a symbol. Jet identifiers take the form
    /// `<field>_<indices>` where `<indices>` is a string of base-variable
    /// names; indices are canonicalized by sorting.
    pub fn resolve(&self, name: &str) -> Result<Sym> {
        if let Some(i) = self.base_index(name) {
            return Ok(Sym::Base(i));
        }
        if let Some(a) = self.fiber_index(name) {
            return Ok(Sym::fiber(a));
        }
        if let Some(i) = self.param_index(name) {
            return Ok(Sym::Param(i));
        }
        if let Some(split) = name.find('_') {
            let (field_name, rest) = name.split_at(split);
            let indices = &rest[1..];
            let field = self
                .fiber_index(field_name)
                .ok_or_else(|| Error::UnknownIdentifier {
                    name: name.to_string(),
                    pos: 0,
                })?;
            let idx = self.parse_indices(name, indices)?;
            return self.jet(field, idx);
        }
        Err(Error::UnknownIdentifier {
            name: name.to_string(),
            pos: 0,
        })
    }

    /// Parses an index string like `xx` or `xy` by greedily matching base
    /// variable names.
    pub fn parse_indices(&self, context: &str, indices: &str) -> Result<MultiIndex> {
        if indices.is_empty() {
            return Err(Error::BadJetIndex {
                name: context.to_string(),
                msg: "empty index string".into(),
            });
        }
        let mut rest = indices;
        let mut out = Vec::new();
        'outer: while !rest.is_empty() {
            // longest base-variable name first
            let mut candidates: Vec<(usize, &String)> = self.base.iter().enumerate().collect();
            candidates.sort_by_key(|(_, n)| std::cmp::Reverse(n.len()));
            for (i, n) in candidates {
                if let Some(tail) = rest.strip_prefix(n.as_str()) {
                    out.push(i as u8);
                    rest = tail;
                    continue 'outer;
                }
            }
            return Err(Error::BadJetIndex {
                name: context.to_string(),
                msg: format!("`{rest}` is not a sequence of base variables"),
            });
        }
        Ok(MultiIndex::new(out))
    }

    /// Deterministic display name of a symbol.
    pub fn sym_name(&self, s: &Sym) -> String {
        match s {
            Sym::Base(i) => self.base[*i as usize].clone(),
            Sym::Param(i) => self.params[*i as usize].clone(),
            Sym::Jet { field, index } => {
                let f = &self.fiber[*field as usize];
                if index.is_empty() {
                    f.clone()
                } else {
                    let mut out = format!("{f}_");
                    for &i in index.indices() {
                        out.push_str(&self.base[i as usize]);
                    }
                    out
                }
            }
        }
    }

    pub fn index_name(&self, index: &MultiIndex) -> String {
        index
            .indices()
            .iter()
            .map(|&i| self.base[i as usize].as_str())
            .collect()
    }
}
