//! Evolutionary systems u_t = D(EL(H)): right-hand sides, conservation
//! law verification (including explicitly time-dependent densities) and
//! transformation under a canonical map.

use std::sync::Arc;

use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{euler_lagrange, is_total_divergence, Density};
use crate::poisson::DiffOperator;
use crate::pullback::Prolongation;

#[derive(Clone, Debug)]
pub struct EvoSystem {
    pub bundle: Arc<Bundle>,
    pub operator: DiffOperator,
    pub hamiltonian: Density,
    pub claws: Vec<(String, Density)>,
}

impl EvoSystem {
    pub fn new(
        bundle: Arc<Bundle>,
        operator: DiffOperator,
        hamiltonian: Density,
        claws: Vec<(String, Density)>,
    ) -> EvoSystem {
        EvoSystem {
            bundle,
            operator,
            hamiltonian,
            claws,
        }
    }

    /// `D(EL(H))`, one component per field.
    pub fn rhs(&self) -> Result<Vec<Expr>> {
        let el = euler_lagrange(&self.bundle, &self.hamiltonian.value)?;
        self.operator.apply(&el)
    }

    /// A density P is conserved iff `dP/dt + sum_a E_a(P) rhs_a` is a
    /// total divergence. The time symbol is a pure parameter.
    pub fn verify_claw(&self, p: &Expr) -> Result<bool> {
        let rhs = self.rhs()?;
        let mut flow = match self.bundle.time() {
            Some(t) => p.partial(&t),
            None => Expr::zero(),
        };
        let el = euler_lagrange(&self.bundle, p)?;
        for (a, r) in rhs.iter().enumerate() {
            flow = flow.add(&el[a].mul(r));
        }
        is_total_divergence(&self.bundle, &flow)
    }

    /// Results of `verify_claw` for every declared conservation law, in
    /// declaration order.
    pub fn verify_claws(&self) -> Result<Vec<(String, bool)>> {
        self.claws
            .iter()
            .map(|(name, d)| Ok((name.clone(), self.verify_claw(&d.value)?)))
            .collect()
    }

    /// The transformed system: the Hamiltonian and every conservation
    /// law are pushed through the transformation; the operator is kept.
    /// `canonical` is the caller's verdict for (map, operator); a false
    /// verdict is an error unless overridden.
    pub fn transform(
        &self,
        prol: &mut Prolongation,
        canonical: bool,
        allow_noncanonical: bool,
    ) -> Result<EvoSystem> {
        if !canonical && !allow_noncanonical {
            return Err(Error::NonCanonical);
        }
        let h = prol.transform_density(&self.hamiltonian.value)?;
        let claws = self
            .claws
            .iter()
            .map(|(name, d)| {
                Ok((
                    name.clone(),
                    Density::new(self.bundle.clone(), prol.transform_density(&d.value)?),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvoSystem {
            bundle: self.bundle.clone(),
            operator: self.operator.clone(),
            hamiltonian: Density::new(self.bundle.clone(), h),
            claws,
        })
    }
}
