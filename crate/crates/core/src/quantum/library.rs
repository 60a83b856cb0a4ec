//! Explicit low-dimensional implementations of known matrices.

use crate::families::catalog::{d_3_third, lambda_example_d, nonconvex_c, nonconvex_c_prime};
use crate::families::{make_a, make_g};
use crate::matrix::CommMatrix;
use crate::rational::{int, rat, Rational};

use super::model::{Complex, Operator, QuantumModel};

pub struct LibraryEntry {
    pub name: &'static str,
    pub model: QuantumModel,
    pub target: CommMatrix,
}

fn exact(rows: &[&[(Rational, Rational)]]) -> Operator {
    rows.iter()
        .map(|r| r.iter().map(|(re, im)| Complex::exact(re.clone(), im.clone())).collect())
        .collect()
}

fn real(rows: &[&[Rational]]) -> Operator {
    rows.iter()
        .map(|r| r.iter().map(|x| Complex::exact(x.clone(), int(0))).collect())
        .collect()
}

/// `(I + x σx + y σy + z σz) · s` as a float operator.
fn bloch(x: f64, y: f64, z: f64, s: f64) -> Operator {
    vec![
        vec![Complex::float(s * (1.0 + z), 0.0), Complex::float(s * x, -s * y)],
        vec![Complex::float(s * x, s * y), Complex::float(s * (1.0 - z), 0.0)],
    ]
}

fn scale(op: &Operator, s: f64) -> Operator {
    op.iter()
        .map(|r| r.iter().map(|z| Complex::float(z.re.to_f64() * s, z.im.to_f64() * s)).collect())
        .collect()
}

fn trine_states() -> Vec<Operator> {
    let r3 = 3f64.sqrt();
    let q = |x: f64| Complex::float(x, 0.0);
    vec![
        vec![vec![q(1.0), q(0.0)], vec![q(0.0), q(0.0)]],
        vec![vec![q(0.25), q(r3 / 4.0)], vec![q(r3 / 4.0), q(0.75)]],
        vec![vec![q(0.25), q(-r3 / 4.0)], vec![q(-r3 / 4.0), q(0.75)]],
    ]
}

fn trine() -> QuantumModel {
    let states = trine_states();
    let effects = states.iter().map(|s| scale(s, 2.0 / 3.0)).collect();
    QuantumModel::new(2, states, effects).expect("2x2 operators")
}

/// Effects `(2/3)(I - ρ_j)`; states reversed so that row `i` vanishes in
/// the column whose support excludes it.
fn trine_complement() -> QuantumModel {
    let states = trine_states();
    let effects = states
        .iter()
        .map(|s| {
            (0..2)
                .map(|r| {
                    (0..2)
                        .map(|c| {
                            let id = if r == c { 1.0 } else { 0.0 };
                            Complex::float(2.0 / 3.0 * (id - s[r][c].re.to_f64()), 0.0)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let reversed = states.into_iter().rev().collect();
    QuantumModel::new(2, reversed, effects).expect("2x2 operators")
}

fn tetrahedron_signs() -> [[i64; 3]; 4] {
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]
}

/// Effects on the tetrahedron, states antipodal to them.
fn qubit_tetrahedron() -> QuantumModel {
    let v: Vec<[f64; 3]> = tetrahedron_signs()
        .iter()
        .map(|s| s.map(|x| x as f64 / 3f64.sqrt()))
        .collect();
    let effects = v.iter().map(|u| bloch(u[0], u[1], u[2], 0.25)).collect();
    let states = v.iter().rev().map(|u| bloch(-u[0], -u[1], -u[2], 0.5)).collect();
    QuantumModel::new(2, states, effects).expect("2x2 operators")
}

/// Real three-dimensional model of `G_{4,2}`: effects `s sᵀ/4` on the
/// tetrahedron, each state the projector orthogonal to two of them.
fn real_tetrahedron() -> QuantumModel {
    let s = tetrahedron_signs();
    let effects = s
        .iter()
        .map(|u| {
            let rows: Vec<Vec<Rational>> = (0..3).map(|i| (0..3).map(|j| rat(u[i] * u[j], 4)).collect()).collect();
            let refs: Vec<&[Rational]> = rows.iter().map(Vec::as_slice).collect();
            real(&refs)
        })
        .collect();
    let g = make_g(4, 2).expect("valid parameters");
    let states = g
        .rows()
        .map(|row| {
            let zeros: Vec<usize> = (0..4).filter(|&j| row[j] == int(0)).collect();
            let (a, b) = (s[zeros[0]], s[zeros[1]]);
            let w = [
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            ];
            let norm: i64 = w.iter().map(|x| x * x).sum();
            let rows: Vec<Vec<Rational>> = (0..3).map(|i| (0..3).map(|j| rat(w[i] * w[j], norm)).collect()).collect();
            let refs: Vec<&[Rational]> = rows.iter().map(Vec::as_slice).collect();
            real(&refs)
        })
        .collect();
    QuantumModel::new(3, states, effects).expect("3x3 operators")
}

/// The two exact qubit models whose matrices mix to a non-qubit matrix.
/// Every state is the top eigenstate of its own effect, as `tr C = 2` requires.
fn nonconvex_pair() -> (QuantumModel, QuantumModel) {
    let z = || int(0);
    let rho = vec![
        exact(&[&[(rat(1, 2), z()), (rat(1, 2), z())], &[(rat(1, 2), z()), (rat(1, 2), z())]]),
        exact(&[&[(rat(1, 2), z()), (z(), rat(-1, 2))], &[(z(), rat(1, 2)), (rat(1, 2), z())]]),
        exact(&[
            &[(rat(1, 2), z()), (rat(-3, 10), rat(2, 5))],
            &[(rat(-3, 10), rat(-2, 5)), (rat(1, 2), z())],
        ]),
    ];
    let m = vec![
        exact(&[&[(rat(1, 4), z()), (rat(1, 4), z())], &[(rat(1, 4), z()), (rat(1, 4), z())]]),
        exact(&[&[(rat(1, 3), z()), (z(), rat(-1, 3))], &[(z(), rat(1, 3)), (rat(1, 3), z())]]),
        exact(&[
            &[(rat(5, 12), z()), (rat(-1, 4), rat(1, 3))],
            &[(rat(-1, 4), rat(-1, 3)), (rat(5, 12), z())],
        ]),
    ];
    let c = QuantumModel::new(2, rho.clone(), m.clone()).expect("2x2 operators");
    let swap = |v: &Vec<Operator>| vec![v[2].clone(), v[1].clone(), v[0].clone()];
    let c_prime = QuantumModel::new(2, swap(&rho), swap(&m)).expect("2x2 operators");
    (c, c_prime)
}

/// Effects `(I ± σx)/4`, `(I ± σy)/4`, states `ρ_i = 2 M(i)`.
fn sigma_xy() -> QuantumModel {
    let q = rat(1, 4);
    let z = || int(0);
    let effects = vec![
        exact(&[&[(q.clone(), z()), (q.clone(), z())], &[(q.clone(), z()), (q.clone(), z())]]),
        exact(&[&[(q.clone(), z()), (-q.clone(), z())], &[(-q.clone(), z()), (q.clone(), z())]]),
        exact(&[&[(q.clone(), z()), (z(), -q.clone())], &[(z(), q.clone()), (q.clone(), z())]]),
        exact(&[&[(q.clone(), z()), (z(), q.clone())], &[(z(), -q.clone()), (q.clone(), z())]]),
    ];
    let states = effects
        .iter()
        .map(|e| {
            e.iter()
                .map(|r| {
                    r.iter()
                        .map(|c| {
                            Complex::exact(
                                c.re.exact().unwrap() * int(2),
                                c.im.exact().unwrap() * int(2),
                            )
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    QuantumModel::new(2, states, effects).expect("2x2 operators")
}

pub fn witness_library() -> Vec<LibraryEntry> {
    let (c, c_prime) = nonconvex_pair();
    vec![
        LibraryEntry {
            name: "trine",
            model: trine(),
            target: d_3_third(),
        },
        LibraryEntry {
            name: "nonconvex-C",
            model: c,
            target: nonconvex_c(),
        },
        LibraryEntry {
            name: "nonconvex-C'",
            model: c_prime,
            target: nonconvex_c_prime(),
        },
        LibraryEntry {
            name: "sigma-xy",
            model: sigma_xy(),
            target: lambda_example_d(),
        },
        LibraryEntry {
            name: "trine-complement",
            model: trine_complement(),
            target: make_a(3).expect("valid parameters"),
        },
        LibraryEntry {
            name: "qubit-tetrahedron",
            model: qubit_tetrahedron(),
            target: make_a(4).expect("valid parameters"),
        },
        LibraryEntry {
            name: "real-tetrahedron",
            model: real_tetrahedron(),
            target: make_g(4, 2).expect("valid parameters"),
        },
    ]
}

/// Tolerance used for library models with irrational entries.
pub const LIBRARY_TOL: f64 = 1e-12;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::model::verify_model;

    #[test]
    fn every_entry_is_valid_and_reproduces_its_target() {
        for entry in witness_library() {
            entry.model.validate(LIBRARY_TOL).unwrap_or_else(|e| panic!("{}: {e}", entry.name));
            let (ok, dev) = verify_model(&entry.model, &entry.target, LIBRARY_TOL).unwrap();
            assert!(ok, "{} deviates by {dev:e}", entry.name);
        }
    }

    #[test]
    fn rational_entries_are_exact() {
        for entry in witness_library() {
            let expect_exact = matches!(entry.name, "nonconvex-C" | "nonconvex-C'" | "sigma-xy" | "real-tetrahedron");
            assert_eq!(entry.model.is_exact(), expect_exact, "{}", entry.name);
        }
    }
}
