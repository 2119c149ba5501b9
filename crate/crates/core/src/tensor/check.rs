//! Finite-difference verification of the reverse pass. This is the
//! independent oracle the test suites lean on: it never touches the
//! backward code, only repeated forward evaluations.

use super::{Mat, Mode, Tape, Var};
use crate::error::{Error, Result};

/// Outcome of a gradient check.
#[derive(Debug, Clone)]
pub struct GradCheck {
    /// Largest relative error over all comparable input elements.
    pub max_rel_error: f64,
    /// Number of elements compared.
    pub compared: usize,
    /// Elements excluded because the two one-sided differences disagree,
    /// i.e. the function has a kink inside the probing interval.
    pub skipped_kinks: usize,
}

/// Compare reverse-mode gradients of a scalar-valued builder against central
/// finite differences with step `h`, element by element over every input.
///
/// The builder must be a pure function of its inputs: it is re-invoked on a
/// fresh tape for every probe.
pub fn grad_check<F>(build: F, inputs: &[Mat], h: f64) -> Result<GradCheck>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }

    let eval = |mats: &[Mat]| -> Result<f64> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = mats.iter().map(|m| tape.input(m.clone(), false)).collect();
        let out = build(&mut tape, &vars)?;
        if tape.shape(out) != (1, 1) {
            return Err(Error::InvalidArgument(
                "grad_check builder must return a scalar".into(),
            ));
        }
        Ok(tape.scalar(out))
    };

    // Analytic gradients once.
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|m| tape.input(m.clone(), true)).collect();
    let out = build(&mut tape, &vars)?;
    let grads = tape.backward(out, Mode::Standard)?;
    let base = eval(inputs)?;

    let mut max_rel_error: f64 = 0.0;
    let mut compared = 0;
    let mut skipped_kinks = 0;
    let mut probe: Vec<Mat> = inputs.to_vec();

    for (k, input) in inputs.iter().enumerate() {
        let analytic = grads.get(vars[k]);
        for i in 0..input.nrows() {
            for j in 0..input.ncols() {
                let orig = input[(i, j)];
                probe[k][(i, j)] = orig + h;
                let up = eval(&probe)?;
                probe[k][(i, j)] = orig - h;
                let down = eval(&probe)?;
                probe[k][(i, j)] = orig;

                let fwd = (up - base) / h;
                let bwd = (base - down) / h;
                // A genuine kink makes the one-sided slopes disagree by an
                // amount far beyond curvature noise; such points are not
                // comparable and are excluded rather than failed.
                if (fwd - bwd).abs() > 0.01 * fwd.abs().max(bwd.abs()).max(1.0) {
                    skipped_kinks += 1;
                    continue;
                }

                let numeric = (up - down) / (2.0 * h);
                let a = analytic.map_or(0.0, |g| g[(i, j)]);
                let denom = a.abs().max(numeric.abs()).max(1e-6);
                max_rel_error = max_rel_error.max((a - numeric).abs() / denom);
                compared += 1;
            }
        }
    }

    Ok(GradCheck {
        max_rel_error,
        compared,
        skipped_kinks,
    })
}
