//! Reverse-mode gradients of scalar objectives over [`Params`].

use super::params::{Gradient, Group, ParamVector, Params, Trainable};
use super::real::Real;
use super::tape::{Tape, Var};
use crate::error::{Error, Result};

/// A scalar loss that can be evaluated on any [`Real`] scalar type.
pub trait Objective {
    fn eval<R: Real>(&self, p: &Params<R>) -> Result<R>;
}

impl<O: Objective + ?Sized> Objective for &O {
    fn eval<R: Real>(&self, p: &Params<R>) -> Result<R> {
        (**self).eval(p)
    }
}

/// Loss value at `p` and its gradient over the trainable groups.
pub fn value_and_grad<O: Objective + ?Sized>(
    objective: &O,
    p: &ParamVector,
    trainable: Trainable,
) -> Result<(f64, Gradient)> {
    let (loss, g) = tape_value_and_grad(objective, p, trainable)?;
    if !loss.is_finite() {
        return Err(Error::Numerical(format!("loss is not finite: {loss}")));
    }
    Ok((loss, g))
}

/// As [`value_and_grad`] but returns non-finite losses instead of failing.
pub(crate) fn tape_value_and_grad<O: Objective + ?Sized>(
    objective: &O,
    p: &ParamVector,
    trainable: Trainable,
) -> Result<(f64, Gradient)> {
    let tape = Tape::new();
    let vars: Params<Var<'_>> = p.map(|group, x| {
        if trainable.includes(group) {
            tape.var(x)
        } else {
            Var::constant(x)
        }
    });
    let out = objective.eval(&vars)?;
    let loss = out.value();
    let adj = tape.adjoints(out);
    let g = vars.map(|_, v| adj.wrt(v));
    Ok((
        loss,
        Gradient {
            pole_raws: g.pole_raws,
            weight_logits: g.weight_logits,
            radial_raws: g.radial_raws,
            log_c: trainable.includes(Group::Curvature).then_some(g.log_c),
            log_bandwidth: trainable.includes(Group::Bandwidth).then_some(g.log_bandwidth),
            head: g.head,
        },
    ))
}

pub fn grad<O: Objective + ?Sized>(objective: &O, p: &ParamVector, trainable: Trainable) -> Result<Gradient> {
    value_and_grad(objective, p, trainable).map(|(_, g)| g)
}
