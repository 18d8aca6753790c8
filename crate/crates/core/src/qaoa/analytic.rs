//! Closed-form depth-one expectation value of a general Ising Hamiltonian.

use crate::ising::IsingModel;

/// `⟨γ,β|H|γ,β⟩` at `p = 1`, offset included, valid for graphs with triangles.
///
/// For every node the single-spin term is
/// `h_i sin2β sin(2γh_i) ∏_{k∈N(i)} cos(2γJ_ik)`. For every edge `(i,j)` the
/// two-spin term is `J_ij/2` times
///
/// ```text
/// sin²2β ∏_{k∈N(i)∖N[j]} cos2γJ_ik ∏_{k∈N(j)∖N[i]} cos2γJ_jk
///   × [cos2γ(h_i−h_j) ∏_{k∈N(i)∩N(j)} cos2γ(J_ik−J_jk) − cos2γ(h_i+h_j) ∏ cos2γ(J_ik+J_jk)]
/// + sin4β sin2γJ_ij [cos2γh_i ∏_{k∈N(i)∖j} cos2γJ_ik + cos2γh_j ∏_{k∈N(j)∖i} cos2γJ_jk]
/// ```
pub fn expectation_p1_analytic(model: &IsingModel, gamma: f64, beta: f64) -> f64 {
    let n = model.n();
    let h = model.h();
    let adj = model.adjacency();
    // dense coupling lookup; NaN marks "no edge"
    let mut coupling = vec![f64::NAN; n * n];
    for (i, j, v) in model.edges() {
        coupling[i * n + j] = v;
        coupling[j * n + i] = v;
    }
    let edge = |i: usize, j: usize| {
        let v = coupling[i * n + j];
        (!v.is_nan()).then_some(v)
    };
    let c2 = |x: f64| (2.0 * gamma * x).cos();

    let (s2b, s4b) = ((2.0 * beta).sin(), (4.0 * beta).sin());

    let mut total = model.offset();
    for i in 0..n {
        if h[i] == 0.0 {
            continue;
        }
        let prod: f64 = adj[i].iter().map(|&(_, v)| c2(v)).product();
        total += h[i] * s2b * (2.0 * gamma * h[i]).sin() * prod;
    }

    for (i, j, jij) in model.edges() {
        // edges into the rest of the graph, excluding j itself
        let mut only_i = 1.0;
        let mut rest_i = 1.0;
        let mut minus = 1.0;
        let mut plus = 1.0;
        for &(k, jik) in &adj[i] {
            if k == j {
                continue;
            }
            rest_i *= c2(jik);
            match edge(j, k) {
                Some(jjk) => {
                    minus *= c2(jik - jjk);
                    plus *= c2(jik + jjk);
                }
                None => only_i *= c2(jik),
            }
        }
        let mut only_j = 1.0;
        let mut rest_j = 1.0;
        for &(k, jjk) in &adj[j] {
            if k == i {
                continue;
            }
            rest_j *= c2(jjk);
            if edge(i, k).is_none() {
                only_j *= c2(jjk);
            }
        }
        let yy = s2b * s2b * only_i * only_j * (c2(h[i] - h[j]) * minus - c2(h[i] + h[j]) * plus);
        let yz = s4b * (2.0 * gamma * jij).sin() * (c2(h[i]) * rest_i + c2(h[j]) * rest_j);
        total += jij / 2.0 * (yy + yz);
    }
    total
}
