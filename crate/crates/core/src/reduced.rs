//! The reduced u-subproblem `H u = d` with
//! `H = (1 + beta) I + gamma_d S* S` and
//! `d = beta z + lambda - gamma_d S*(S(0) - y_d)`.

use crate::error::{Error, Result};
use crate::field::ControlField;
use crate::problems::Problem;

#[derive(Debug, Clone, Copy)]
pub struct ReducedOperator<'a> {
    problem: &'a Problem,
    beta: f64,
}

impl<'a> ReducedOperator<'a> {
    pub fn new(problem: &'a Problem, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Parameter(format!("penalty must be positive, got {beta}")));
        }
        Ok(ReducedOperator { problem, beta })
    }

    pub fn problem(&self) -> &'a Problem {
        self.problem
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `(1 + beta) u + gamma_d S*(S u)`: one forward and one adjoint sweep.
    pub fn apply_h(&self, u: &ControlField) -> Result<ControlField> {
        let disc = self.problem.disc();
        let y = disc.apply_sbar(u)?;
        let mut out = disc.apply_sbar_star(&y)?;
        out.scale(self.problem.gamma_d());
        out.axpy(1.0 + self.beta, u);
        Ok(out)
    }

    pub fn assemble_d(&self, z: &ControlField, lambda: &ControlField) -> Result<ControlField> {
        z.check_shape(lambda)?;
        let mut d = ControlField::lin_comb(self.beta, z, 1.0, lambda);
        d.axpy(-1.0, self.problem.gradient_offset());
        Ok(d)
    }

    /// First-order residual of the u-subproblem,
    /// `(1 + beta) u + gamma_d S*(S(u) - y_d) - (beta z + lambda)`, evaluated
    /// through the full state `S(u)` rather than through `H` and `d`.
    pub fn sigma(&self, u: &ControlField, z: &ControlField, lambda: &ControlField) -> Result<ControlField> {
        u.check_shape(z)?;
        u.check_shape(lambda)?;
        let state = self.problem.state(u)?;
        let mut s = self.problem.gradient_with_state(u, &state)?;
        s.axpy(self.beta, u);
        s.axpy(-self.beta, z);
        s.axpy(-1.0, lambda);
        Ok(s)
    }

    pub fn sigma_norm(&self, u: &ControlField, z: &ControlField, lambda: &ControlField) -> Result<f64> {
        let s = self.sigma(u, z, lambda)?;
        Ok(self.problem.disc().unorm(&s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{example1, example2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(p: &Problem, rng: &mut ChaCha8Rng) -> ControlField {
        let d = p.disc();
        ControlField::from_fn(d.n_control(), d.n_t(), |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn rejects_nonpositive_penalty() {
        let p = example1().assemble(4, 2).unwrap();
        assert!(ReducedOperator::new(&p, 0.0).is_err());
    }

    #[test]
    fn h_is_symmetric_and_coercive() {
        for spec in [example1(), example2()] {
            let p = spec.assemble(16, 16).unwrap();
            let op = ReducedOperator::new(&p, 3.0).unwrap();
            let d = p.disc();
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..5 {
                let u = random(&p, &mut rng);
                let v = random(&p, &mut rng);
                let hu = op.apply_h(&u).unwrap();
                let hv = op.apply_h(&v).unwrap();
                let scale = d.norm_u(&u).unwrap() * d.norm_u(&v).unwrap();
                let asym = d.dot_u(&hu, &v).unwrap() - d.dot_u(&u, &hv).unwrap();
                assert!(asym.abs() <= 1e-10 * scale, "{asym}");
                let uu = d.dot_u(&u, &u).unwrap();
                assert!(d.dot_u(&hu, &u).unwrap() >= 4.0 * uu - 1e-12);
            }
        }
    }

    #[test]
    fn sigma_equals_h_minus_d() {
        let p = example1().assemble(8, 8).unwrap();
        let op = ReducedOperator::new(&p, 2.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (u, z, l) = (random(&p, &mut rng), random(&p, &mut rng), random(&p, &mut rng));
        let direct = op.sigma(&u, &z, &l).unwrap();
        let mut split = op.apply_h(&u).unwrap();
        split.axpy(-1.0, &op.assemble_d(&z, &l).unwrap());
        let diff = ControlField::lin_comb(1.0, &direct, -1.0, &split);
        let d = p.disc();
        assert!(d.norm_u(&diff).unwrap() <= 1e-12 * d.norm_u(&direct).unwrap());
    }
}
