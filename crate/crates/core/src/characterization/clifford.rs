use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::OnceLock;

use crate::gates::{rotation_angles, target_unitary};
use crate::quantum::{c, trace_overlap, CMatrix, Operator};

const SAME: f64 = 1e-10;

/// One single-qubit Clifford, stored with the rotation that realizes it as
/// a single loop.
#[derive(Debug, Clone)]
pub struct Clifford {
    pub unitary: CMatrix,
    pub theta: f64,
    pub phi: f64,
    pub gamma: f64,
}

impl Clifford {
    pub fn operator(&self) -> Operator {
        Operator::new(self.unitary.clone()).expect("2x2")
    }
}

/// The 24-element single-qubit Clifford group modulo global phase.
#[derive(Debug, Clone)]
pub struct CliffordGroup {
    pub elements: Vec<Clifford>,
    /// `mul[a][b]` is the index of `U_a U_b`.
    pub mul: Vec<Vec<usize>>,
    pub inv: Vec<usize>,
    pub identity: usize,
}

/// `true` when `a` and `b` agree up to a global phase.
pub fn same_up_to_phase(a: &CMatrix, b: &CMatrix) -> bool {
    trace_overlap(a, b) > 1.0 - SAME
}

impl CliffordGroup {
    /// Index of the element equal to `u` up to global phase.
    pub fn find(&self, u: &CMatrix) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| same_up_to_phase(&e.unitary, u))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Breadth-first closure of `{H, S}`, with each element rewritten as the
/// rotation `U(theta, phi, gamma)` it equals up to phase.
pub fn clifford_group() -> &'static CliffordGroup {
    static GROUP: OnceLock<CliffordGroup> = OnceLock::new();
    GROUP.get_or_init(build)
}

fn build() -> CliffordGroup {
    let h = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0)])
        * c(FRAC_1_SQRT_2, 0.0);
    let s = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
    let mut found = vec![CMatrix::identity(2, 2)];
    let mut frontier = 0;
    while frontier < found.len() {
        let u = found[frontier].clone();
        for g in [&h, &s] {
            let next = g * &u;
            if !found.iter().any(|f| same_up_to_phase(f, &next)) {
                found.push(next);
            }
        }
        frontier += 1;
    }
    let elements: Vec<Clifford> = found
        .iter()
        .map(|u| {
            let (theta, phi, gamma) = rotation_angles(u);
            Clifford {
                unitary: target_unitary(theta, phi, gamma).into_matrix(),
                theta,
                phi,
                gamma,
            }
        })
        .collect();
    let index = |u: &CMatrix| {
        elements
            .iter()
            .position(|e| same_up_to_phase(&e.unitary, u))
            .expect("Clifford group is closed")
    };
    let mul = elements
        .iter()
        .map(|a| {
            elements
                .iter()
                .map(|b| index(&(&a.unitary * &b.unitary)))
                .collect()
        })
        .collect();
    let inv = elements
        .iter()
        .map(|a| index(&a.unitary.adjoint()))
        .collect();
    let identity = index(&CMatrix::identity(2, 2));
    CliffordGroup {
        elements,
        mul,
        inv,
        identity,
    }
}
