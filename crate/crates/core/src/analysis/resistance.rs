//! Resistance calculus: the exponential decay rate `R` of a positive
//! function `f(τ) ~ g(τ) e^{−R/τ}` as `τ → 0`, tracked symbolically.

use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::game::{CapGame, UtilityMode};
use crate::scalar::Scalar;

use super::trees::for_each_arborescence;
use super::{ProfileSpace, TREE_STATE_LIMIT};

/// Resistance of a BLLA transition whose utility drop is `delta`.
pub fn transition_resistance(delta: f64) -> f64 {
    delta.max(0.0)
}

/// Opaque label for a sub-exponential factor `g(τ)`; never evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct SubExpTag(pub String);

impl fmt::Display for SubExpTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// `± g(τ) e^{−R/τ}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceTerm {
    pub tag: SubExpTag,
    pub resistance: f64,
    pub negative: bool,
}

/// A finite signed sum of terms. Terms with the smallest resistance are
/// always positive, so the expression is a positive function near `τ = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceExpr {
    terms: Vec<ResistanceTerm>,
}

impl ResistanceExpr {
    pub fn term(tag: impl Into<String>, resistance: f64) -> Result<Self> {
        if !resistance.is_finite() {
            return Err(invalid("resistance must be finite"));
        }
        Ok(Self {
            terms: vec![ResistanceTerm {
                tag: SubExpTag(tag.into()),
                resistance,
                negative: false,
            }],
        })
    }

    /// A positive constant `κ`.
    pub fn constant(tag: impl Into<String>) -> Self {
        Self::term(tag, 0.0).expect("zero is finite")
    }

    /// `e^{−κ/τ}`.
    pub fn exponential(kappa: f64) -> Result<Self> {
        Self::term(format!("exp(-{kappa}/tau)"), kappa)
    }

    pub fn terms(&self) -> &[ResistanceTerm] {
        &self.terms
    }

    /// Smallest term resistance.
    pub fn resistance(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.resistance)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Resistance of a positive constant.
pub fn res_of_const() -> f64 {
    0.0
}

/// Resistance of `e^{−κ/τ}`.
pub fn res_of_exp(kappa: f64) -> f64 {
    kappa
}

/// Sum: resistances combine by `min`.
pub fn res_add(e1: &ResistanceExpr, e2: &ResistanceExpr) -> ResistanceExpr {
    let mut terms = e1.terms.clone();
    terms.extend(e2.terms.iter().cloned());
    ResistanceExpr { terms }
}

/// Product: term-wise expansion, resistances add.
pub fn res_mul(e1: &ResistanceExpr, e2: &ResistanceExpr) -> ResistanceExpr {
    let mut terms = Vec::with_capacity(e1.terms.len() * e2.terms.len());
    for a in &e1.terms {
        for b in &e2.terms {
            terms.push(ResistanceTerm {
                tag: SubExpTag(format!("({})*({})", a.tag, b.tag)),
                resistance: a.resistance + b.resistance,
                negative: a.negative != b.negative,
            });
        }
    }
    ResistanceExpr { terms }
}

/// Difference `e1 − e2`, defined only when `Res(e1) < Res(e2)` (the result
/// then keeps `Res(e1)`). Equal resistances leave the leading behaviour
/// unknown; `Res(e1) > Res(e2)` would make the difference negative.
pub fn res_sub(e1: &ResistanceExpr, e2: &ResistanceExpr) -> Result<ResistanceExpr> {
    let (r1, r2) = (e1.resistance(), e2.resistance());
    if r1 == r2 {
        return Err(Error::ResistanceUndefined(format!(
            "difference of two expressions with equal resistance {r1}"
        )));
    }
    if r1 > r2 {
        return Err(Error::ResistanceUndefined(format!(
            "difference is eventually negative (resistance {r1} > {r2})"
        )));
    }
    let mut terms = e1.terms.clone();
    terms.extend(e2.terms.iter().map(|t| ResistanceTerm {
        negative: !t.negative,
        ..t.clone()
    }));
    Ok(ResistanceExpr { terms })
}

/// Reciprocal of a single term with nonzero resistance: `Res(1/f) = −Res(f)`.
pub fn res_inv(e: &ResistanceExpr) -> Result<ResistanceExpr> {
    match e.terms.as_slice() {
        [t] if t.resistance != 0.0 => ResistanceExpr::term(format!("1/({})", t.tag), -t.resistance),
        [_] => Err(Error::ResistanceUndefined(
            "reciprocal of a zero-resistance expression".into(),
        )),
        _ => Err(Error::ResistanceUndefined(
            "reciprocal of a multi-term expression".into(),
        )),
    }
}

/// Least-squares estimate of a resistance from samples of `f`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalResistance {
    /// Intercept of the fit of `−τ ln f(τ)` against `τ`.
    pub estimate: f64,
    pub slope: f64,
    pub max_residual: f64,
    pub warning: Option<String>,
}

/// Fits `−τ ln f(τ) ≈ R + bτ` on `tau_grid` and reports the intercept `R`.
/// Warns when the largest fit residual exceeds `tol`.
pub fn empirical_resistance(
    f: impl Fn(f64) -> f64,
    tau_grid: &[f64],
    tol: f64,
) -> Result<EmpiricalResistance> {
    if tau_grid.len() < 2 {
        return Err(invalid("need at least two temperatures"));
    }
    let mut xs = Vec::with_capacity(tau_grid.len());
    let mut ys = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let v = f(tau);
        if !(tau > 0.0 && v > 0.0 && v.is_finite()) {
            return Err(invalid(format!("f({tau}) = {v} is not positive")));
        }
        xs.push(tau);
        ys.push(-tau * v.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(invalid("temperatures must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let estimate = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - estimate - slope * x).abs())
        .fold(0.0, f64::max);
    let warning = (max_residual > tol).then(|| {
        format!(
            "fit residual {max_residual:.3e} exceeds {tol:.1e}; \
             the sub-exponential factor is not negligible on this grid"
        )
    });
    Ok(EmpiricalResistance {
        estimate,
        slope,
        max_residual,
        warning,
    })
}

/// Edge resistances of a chain; `None` where there is no transition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResistanceMatrix {
    n: usize,
    data: Vec<Option<f64>>,
}

impl ResistanceMatrix {
    pub fn new(rows: Vec<Vec<Option<f64>>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(invalid("resistance matrix must be square"));
        }
        Ok(Self {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, from: usize, to: usize) -> Option<f64> {
        self.data[from * self.n + to]
    }
}

/// BLLA edge resistances `max(0, U_i(a) − U_i(b))` between single-player
/// deviations (deterministic mode).
pub fn resistance_graph<T: Scalar>(game: &CapGame<T>) -> Result<(ProfileSpace, ResistanceMatrix)> {
    if game.mode() != UtilityMode::Deterministic {
        return Err(Error::RequiresDeterministic);
    }
    let space = ProfileSpace::new(game, TREE_STATE_LIMIT as u128)?;
    let n = space.len();
    let mut data = vec![None; n * n];
    for a in 0..n {
        let pa = space.profile(a);
        for &i in space.active_players() {
            let u_a = game.utility(&pa, i)?.as_f64();
            for c in (0..space.num_channels()).filter(|&c| c != pa.channel(i)) {
                let pb = pa.with_channel(i, c);
                let u_b = game.utility(&pb, i)?.as_f64();
                data[a * n + space.index(&pb)] = Some(transition_resistance(u_a - u_b));
            }
        }
    }
    Ok((space, ResistanceMatrix { n, data }))
}

/// Outcome of the minimum-resistance spanning tree enumeration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeCheck {
    /// Smallest total resistance of any rooted spanning tree.
    pub min_resistance: f64,
    /// Minimum tree resistance per root (stochastic potential).
    pub root_potentials: Vec<f64>,
    /// Roots whose minimum trees achieve `min_resistance`.
    pub min_roots: Vec<usize>,
    pub num_min_trees: usize,
    /// Every minimum tree uses at least one zero-resistance edge.
    pub passed: bool,
    pub witness_root: usize,
    /// Parent array of one minimum tree (`parent[root] == root`).
    pub witness: Vec<usize>,
}

/// Enumerates all rooted spanning trees (edges toward the root), finds the
/// minimum total resistance and checks that each minimizing tree contains a
/// zero-resistance edge. Ties are judged within 1e-12.
pub fn min_resistance_tree_check(r: &ResistanceMatrix) -> Result<TreeCheck> {
    let n = r.len();
    if n == 0 {
        return Err(invalid("empty chain"));
    }
    if n > TREE_STATE_LIMIT {
        return Err(Error::StateSpaceTooLarge {
            size: n as u128,
            limit: TREE_STATE_LIMIT as u128,
        });
    }
    const TOL: f64 = 1e-12;
    let weight = |parent: &[usize], root: usize| -> (f64, bool) {
        let mut total = 0.0;
        let mut has_zero = false;
        for v in (0..n).filter(|&v| v != root) {
            let e = r.get(v, parent[v]).expect("tree edges exist");
            total += e;
            has_zero |= e.abs() <= TOL;
        }
        (total, has_zero)
    };

    let mut root_potentials = vec![f64::INFINITY; n];
    for (root, best) in root_potentials.iter_mut().enumerate() {
        for_each_arborescence(n, root, |v, w| r.get(v, w).is_some(), |parent| {
            *best = best.min(weight(parent, root).0);
        });
    }
    let min_resistance = root_potentials.iter().copied().fold(f64::INFINITY, f64::min);
    if !min_resistance.is_finite() {
        return Err(invalid("chain has no spanning tree (not irreducible)"));
    }
    let min_roots: Vec<usize> = (0..n)
        .filter(|&c| root_potentials[c] - min_resistance <= TOL)
        .collect();

    let mut num_min_trees = 0;
    let mut passed = true;
    let mut witness: Option<(usize, Vec<usize>)> = None;
    for &root in &min_roots {
        for_each_arborescence(n, root, |v, w| r.get(v, w).is_some(), |parent| {
            let (total, has_zero) = weight(parent, root);
            if total - min_resistance <= TOL {
                num_min_trees += 1;
                // A single-state chain has no edges; the check holds vacuously.
                passed &= has_zero || n == 1;
                if witness.is_none() {
                    witness = Some((root, parent.to_vec()));
                }
            }
        });
    }
    let (witness_root, witness) = witness.expect("a minimum tree exists");
    Ok(TreeCheck {
        min_resistance,
        root_potentials,
        min_roots,
        num_min_trees,
        passed,
        witness_root,
        witness,
    })
}
