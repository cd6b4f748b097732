//! Witness search: nonzero rational parameters that make a chosen set of
//! entries vanish simultaneously.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::symcm::{ParamAssignment, StemPoly, SymCM};

/// Values tried by the grid search.
pub const GRID_VALUES: [(i64, i64); 10] = [
    (1, 1),
    (-1, 1),
    (2, 1),
    (-2, 1),
    (3, 1),
    (-3, 1),
    (1, 2),
    (-1, 2),
    (1, 3),
    (-1, 3),
];

fn grid_value(i: usize) -> BigRational {
    let (n, d) = GRID_VALUES[i];
    BigRational::new(n.into(), d.into())
}

fn small_nonzero(rng: &mut impl Rng) -> BigRational {
    let mag = rng.gen_range(1..=7i64);
    BigRational::from_integer(if rng.gen_bool(0.5) { mag } else { -mag }.into())
}

/// Looks for a witness: first by isolating one fresh parameter per
/// polynomial and solving linearly, then by grid search.
pub fn find_witness(
    m: &SymCM,
    cells: &[(usize, usize)],
    solve_attempts: usize,
    grid_points: usize,
    rng: &mut impl Rng,
) -> Option<ParamAssignment> {
    let mut order: Vec<(usize, usize)> = cells.to_vec();
    order.sort_by_key(|&(r, c)| (m.col_of(c).1, c, r));
    let polys: Vec<(usize, &StemPoly)> = order.iter().map(|&(r, c)| (r, m.entry(r, c))).collect();
    for attempt in 0..solve_attempts {
        if let Some(w) = isolate(m, &polys, attempt, rng) {
            return Some(w);
        }
    }
    grid(m, &polys, grid_points, rng)
}

fn isolate(
    m: &SymCM,
    polys: &[(usize, &StemPoly)],
    attempt: usize,
    rng: &mut impl Rng,
) -> Option<ParamAssignment> {
    let edge_count = m.edges().len();
    let mut values: Vec<Option<BigRational>> = vec![None; edge_count];
    for &(row, poly) in polys {
        let mut unfixed: Vec<usize> = poly
            .variables()
            .into_iter()
            .filter(|&e| values[e].is_none())
            .collect();
        if attempt == 0 {
            // last edges into the row first, then edges nearer the leader
            unfixed.sort_by_key(|&e| (m.edges()[e].to != row, std::cmp::Reverse(e)));
        } else {
            unfixed.shuffle(rng);
        }
        if unfixed.is_empty() {
            let dense: Vec<BigRational> = values.iter().map(|v| v.clone().unwrap_or_else(BigRational::one)).collect();
            if !poly.evaluate(&dense).is_zero() {
                return None;
            }
            continue;
        }
        let mut solved = false;
        for &cand in &unfixed {
            let mut trial = values.clone();
            for &e in &unfixed {
                if e != cand {
                    trial[e] = Some(small_nonzero(rng));
                }
            }
            let (q, r) = split_linear(poly, cand, &trial);
            if !q.is_zero() {
                let v = -r / q;
                if v.is_zero() {
                    continue;
                }
                trial[cand] = Some(v);
            } else if r.is_zero() {
                trial[cand] = Some(small_nonzero(rng));
            } else {
                continue;
            }
            values = trial;
            solved = true;
            break;
        }
        if !solved {
            return None;
        }
    }
    let dense: Vec<BigRational> = values
        .into_iter()
        .map(|v| v.unwrap_or_else(|| small_nonzero(rng)))
        .collect();
    polys
        .iter()
        .all(|(_, p)| p.evaluate(&dense).is_zero())
        .then(|| ParamAssignment::from_dense(dense))
}

/// Writes `poly = var * q + r` under the fixed values of every other variable.
fn split_linear(poly: &StemPoly, var: usize, values: &[Option<BigRational>]) -> (BigRational, BigRational) {
    let mut q = BigRational::zero();
    let mut r = BigRational::zero();
    for mono in poly.monomials() {
        let mut term = BigRational::from_integer(mono.coefficient.into());
        let mut has_var = false;
        for &e in &mono.edges {
            if e == var {
                has_var = true;
            } else {
                term *= values[e].as_ref().expect("all other variables fixed");
            }
        }
        if has_var {
            q += term;
        } else {
            r += term;
        }
    }
    (q, r)
}

fn grid(
    m: &SymCM,
    polys: &[(usize, &StemPoly)],
    grid_points: usize,
    rng: &mut impl Rng,
) -> Option<ParamAssignment> {
    let mut vars: Vec<usize> = polys.iter().flat_map(|(_, p)| p.variables()).collect();
    vars.sort_unstable();
    vars.dedup();
    let base = GRID_VALUES.len();
    let full = (base as f64).powi(vars.len() as i32) <= grid_points as f64;
    let points = if full { base.pow(vars.len() as u32) } else { grid_points };
    let mut dense = vec![BigRational::one(); m.edges().len()];
    for idx in 0..points {
        let mut code = idx;
        for &v in &vars {
            let pick = if full {
                let d = code % base;
                code /= base;
                d
            } else {
                rng.gen_range(0..base)
            };
            dense[v] = grid_value(pick);
        }
        if polys.iter().all(|(_, p)| p.evaluate(&dense).is_zero()) {
            return Some(ParamAssignment::from_dense(dense));
        }
    }
    None
}
