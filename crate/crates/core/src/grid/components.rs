use super::GridSet;
use std::collections::VecDeque;

/// Partition of the occupied cells under face adjacency (`2n` neighbors).
///
/// Each component lists linear cell indices in ascending order; components
/// are ordered by their smallest cell.
pub fn connected_components(a: &GridSet) -> Vec<Vec<usize>> {
    let g = a.geometry();
    let ext = g.extents();
    let strides = g.strides();
    let mut seen = vec![false; g.cell_count()];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in a.occupied_linear() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(lin) = queue.pop_front() {
            comp.push(lin);
            let idx = g.multi(lin);
            for k in 0..ext.len() {
                let mut visit = |nb: usize| {
                    if !seen[nb] && a.get_linear(nb) {
                        seen[nb] = true;
                        queue.push_back(nb);
                    }
                };
                if idx[k] > 0 {
                    visit(lin - strides[k]);
                }
                if idx[k] + 1 < ext[k] {
                    visit(lin + strides[k]);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Non-empty and face-connected.
pub fn is_grid_continuum(a: &GridSet) -> bool {
    connected_components(a).len() == 1
}
