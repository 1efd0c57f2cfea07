//! Line-oriented manifest format describing a bundle, an optional
//! transformation, a Poisson operator, a Hamiltonian, named
//! conservation laws, published reference values and run options.

use std::path::Path;
use std::sync::Arc;

use jetcalc::{Automorphism, Bundle, CaseKind, DiffOperator, Expr, MultiIndex};

#[derive(Debug)]
pub struct Manifest {
    pub bundle: Arc<Bundle>,
    pub transform: Option<Automorphism>,
    pub operator: DiffOperator,
    pub hamiltonian: Expr,
    pub claws: Vec<(String, Expr)>,
    /// Externally published reference values keyed `H`, `rhs.<field>`
    /// or `claw.<name>`; compared against recomputed values.
    pub published: Vec<(String, Expr)>,
    pub options: Options,
}

#[derive(Debug, Default, Clone)]
pub struct Options {
    pub case: Option<CaseKind>,
    pub samples: Option<u32>,
    pub seed: Option<u64>,
    pub max_order: Option<usize>,
}

/// A manifest-level failure, rendered as `line N: message`.
#[derive(Debug)]
pub struct LoadError {
    pub line: Option<usize>,
    pub msg: String,
}

impl std::fmt::Display for LoadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.msg),
            None => write!(f, "{}", self.msg),
        }
    }
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, LoadError> {
    Err(LoadError {
        line: Some(line),
        msg: msg.into(),
    })
}

struct Item {
    line: usize,
    key: String,
    value: String,
}

pub fn parse_case(text: &str) -> Option<Option<CaseKind>> {
    match text {
        "auto" => Some(None),
        "1" => Some(Some(CaseKind::Case1)),
        "2" => Some(Some(CaseKind::Case2)),
        "3" => Some(Some(CaseKind::Case3)),
        _ => None,
    }
}

pub fn load(path: &Path) -> Result<Manifest, LoadError> {
    let text = std::fs::read_to_string(path).map_err(|e| LoadError {
        line: None,
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<Manifest, LoadError> {
    const SECTIONS: [&str; 7] = [
        "bundle",
        "transform",
        "operator",
        "hamiltonian",
        "claws",
        "published",
        "options",
    ];
    let mut sections: Vec<Vec<Item>> = (0..SECTIONS.len()).map(|_| Vec::new()).collect();
    let mut current: Option<usize> = None;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            match SECTIONS.iter().position(|s| *s == name) {
                Some(idx) => {
                    if !sections[idx].is_empty() {
                        return err(line_no, format!("duplicate section [{name}]"));
                    }
                    current = Some(idx);
                }
                None => return err(line_no, format!("unknown section [{name}]")),
            }
            continue;
        }
        let idx = match current {
            Some(i) => i,
            None => return err(line_no, "content before the first section header"),
        };
        // operator rows use `:`; everything else uses `=`
        let sep = if SECTIONS[idx] == "operator" {
            ':'
        } else {
            '='
        };
        let (key, value) = match line.split_once(sep) {
            Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
            None => return err(line_no, format!("expected `{sep}` in entry")),
        };
        if key.is_empty() || value.is_empty() {
            return err(line_no, "empty key or value");
        }
        sections[idx].push(Item {
            line: line_no,
            key,
            value,
        });
    }

    let options = parse_options(&sections[6])?;

    // bundle first: every later expression parses against it
    let mut base = Vec::new();
    let mut fiber = Vec::new();
    let mut params = Vec::new();
    if sections[0].is_empty() {
        return Err(LoadError {
            line: None,
            msg: "missing [bundle] section".into(),
        });
    }
    for item in &sections[0] {
        let words: Vec<String> = item.value.split_whitespace().map(String::from).collect();
        match item.key.as_str() {
            "base" => base = words,
            "fiber" => fiber = words,
            "params" => params = words,
            other => return err(item.line, format!("unknown bundle key `{other}`")),
        }
    }
    let bundle = Bundle::new(base, fiber, params).map_err(|e| LoadError {
        line: None,
        msg: e.to_string(),
    })?;
    let bundle = Arc::new(match options.max_order {
        Some(k) => bundle.with_max_order(k),
        None => bundle,
    });

    let expr = |line: usize, text: &str| -> Result<Expr, LoadError> {
        jetcalc::parse(text, &bundle).map_err(|e| LoadError {
            line: Some(line),
            msg: e.to_string(),
        })
    };

    // [transform]: keys `<base>~` and `<fiber>~`, one per variable
    let transform = if sections[1].is_empty() {
        None
    } else {
        let mut base_map: Vec<Option<Expr>> = vec![None; bundle.n()];
        let mut fiber_map: Vec<Option<Expr>> = vec![None; bundle.m()];
        for item in &sections[1] {
            let name = match item.key.strip_suffix('~') {
                Some(n) => n.trim(),
                None => return err(item.line, "transform keys must end in `~`"),
            };
            let value = expr(item.line, &item.value)?;
            if let Some(i) = bundle.base_index(name) {
                base_map[i as usize] = Some(value);
            } else if let Some(a) = bundle.fiber_index(name) {
                fiber_map[a as usize] = Some(value);
            } else {
                return err(item.line, format!("`{name}` is not a declared variable"));
            }
        }
        let unwrap_all = |v: Vec<Option<Expr>>, kind: &str| -> Result<Vec<Expr>, LoadError> {
            v.into_iter()
                .map(|e| {
                    e.ok_or_else(|| LoadError {
                        line: None,
                        msg: format!("[transform] must map every {kind} variable"),
                    })
                })
                .collect()
        };
        let auto = Automorphism::new(
            bundle.clone(),
            unwrap_all(base_map, "base")?,
            unwrap_all(fiber_map, "fiber")?,
        )
        .map_err(|e| LoadError {
            line: None,
            msg: e.to_string(),
        })?;
        Some(auto)
    };

    // [operator]: rows `<a> <b> : term { + term }`
    if sections[2].is_empty() {
        return Err(LoadError {
            line: None,
            msg: "missing [operator] section".into(),
        });
    }
    let mut op_terms = Vec::new();
    for item in &sections[2] {
        let fields: Vec<&str> = item.key.split_whitespace().collect();
        if fields.len() != 2 {
            return err(item.line, "operator row must name two fields");
        }
        let resolve_field = |name: &str| -> Result<u8, LoadError> {
            bundle.fiber_index(name).ok_or(LoadError {
                line: Some(item.line),
                msg: format!("`{name}` is not a fiber variable"),
            })
        };
        let a = resolve_field(fields[0])?;
        let b = resolve_field(fields[1])?;
        for term in split_top_level(&item.value) {
            let (coeff, index) = parse_operator_term(&bundle, item.line, term.trim())?;
            let coeff = expr(item.line, &coeff)?;
            op_terms.push((a, b, coeff, index));
        }
    }
    let operator = DiffOperator::new(bundle.clone(), op_terms).map_err(|e| LoadError {
        line: None,
        msg: e.to_string(),
    })?;

    // [hamiltonian]: exactly one entry
    if sections[3].len() != 1 {
        return Err(LoadError {
            line: None,
            msg: "exactly one [hamiltonian] entry required".into(),
        });
    }
    let hamiltonian = expr(sections[3][0].line, &sections[3][0].value)?;

    let mut claws = Vec::new();
    for item in &sections[4] {
        if claws.iter().any(|(n, _)| n == &item.key) {
            return err(item.line, format!("duplicate claw `{}`", item.key));
        }
        claws.push((item.key.clone(), expr(item.line, &item.value)?));
    }

    let mut published = Vec::new();
    for item in &sections[5] {
        let valid = item.key == "H"
            || item
                .key
                .strip_prefix("rhs.")
                .map(|f| bundle.fiber_index(f).is_some())
                .unwrap_or(false)
            || item
                .key
                .strip_prefix("claw.")
                .map(|n| claws.iter().any(|(c, _)| c == n))
                .unwrap_or(false);
        if !valid {
            return err(item.line, format!("unknown published key `{}`", item.key));
        }
        published.push((item.key.clone(), expr(item.line, &item.value)?));
    }

    Ok(Manifest {
        bundle,
        transform,
        operator,
        hamiltonian,
        claws,
        published,
        options,
    })
}

fn parse_options(items: &[Item]) -> Result<Options, LoadError> {
    let mut out = Options::default();
    for item in items {
        match item.key.as_str() {
            "case" => match parse_case(&item.value) {
                Some(c) => out.case = c,
                None => return err(item.line, "case must be auto, 1, 2 or 3"),
            },
            "samples" => out.samples = Some(parse_num(item)?),
            "seed" => out.seed = Some(parse_num(item)?),
            "max_order" => out.max_order = Some(parse_num(item)?),
            other => return err(item.line, format!("unknown option `{other}`")),
        }
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(item: &Item) -> Result<T, LoadError> {
    item.value.parse().map_err(|_| LoadError {
        line: Some(item.line),
        msg: format!("invalid number `{}`", item.value),
    })
}

/// Splits on `+` at parenthesis/brace depth zero.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '{' => depth += 1,
            ')' | '}' => depth = depth.saturating_sub(1),
            '+' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

/// One operator term `coefExpr * D{indices}`; `D{}` is order zero.
fn parse_operator_term(
    bundle: &Bundle,
    line: usize,
    term: &str,
) -> Result<(String, MultiIndex), LoadError> {
    let inner = match term.strip_suffix('}') {
        Some(rest) => rest,
        None => {
            return err(
                line,
                format!("operator term `{term}` must end with D{{...}}"),
            )
        }
    };
    let d_pos = match inner.rfind("D{") {
        Some(p) => p,
        None => {
            return err(
                line,
                format!("operator term `{term}` must end with D{{...}}"),
            )
        }
    };
    let indices = inner[d_pos + 2..].trim();
    let prefix = inner[..d_pos].trim_end();
    let coeff = match prefix.strip_suffix('*') {
        Some(c) if !c.trim().is_empty() => c.trim().to_string(),
        _ => {
            return err(
                line,
                format!("operator term `{term}` needs `coef * D{{...}}`"),
            )
        }
    };
    let index = if indices.is_empty() {
        MultiIndex::empty()
    } else {
        let compact: String = indices.chars().filter(|c| !c.is_whitespace()).collect();
        bundle
            .parse_indices(term, &compact)
            .map_err(|e| LoadError {
                line: Some(line),
                msg: e.to_string(),
            })?
    };
    Ok((coeff, index))
}
