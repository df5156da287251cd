use super::dilate::for_each_line;
use super::{GridError, GridSet, Semantics};

/// Keeps the cells whose whole sup-norm neighborhood of radius `r` cells is
/// occupied. Cells outside the box count as unoccupied. Semantics are copied.
pub fn erode_cells(a: &GridSet, r: usize) -> GridSet {
    let mut out = a.clone();
    if r == 0 {
        return out;
    }
    let extents = a.geometry().extents().to_vec();
    let mut line: Vec<bool> = Vec::new();
    let mut dist: Vec<usize> = Vec::new();
    for axis in 0..extents.len() {
        let len = extents[axis];
        let bits = &mut out.occupancy;
        for_each_line(&extents, axis, |start, stride| {
            line.clear();
            line.extend((0..len).map(|t| bits[start + t * stride]));
            // length of the occupied run ending at t (virtual empties at -1 and len)
            dist.clear();
            let mut last_gap = 0usize; // position of gap + 1
            for (t, &v) in line.iter().enumerate() {
                if !v {
                    last_gap = t + 1;
                }
                dist.push(t + 1 - last_gap);
            }
            let mut next_gap = len;
            for t in (0..len).rev() {
                if !line[t] {
                    next_gap = t;
                }
                let keep = line[t] && dist[t] > r && next_gap - t > r;
                if keep != line[t] {
                    bits.set(start + t * stride, keep);
                }
            }
        });
    }
    out
}

/// Erodes an outer approximation by `r` cells.
///
/// The result is labelled `Inner` when `r * h >= radius + h`; otherwise it is
/// labelled `Eroded` and carries no containment guarantee.
pub fn erode(a: &GridSet, r: usize) -> Result<GridSet, GridError> {
    let radius = match a.semantics() {
        Semantics::Outer { radius } => radius,
        s => return Err(GridError::Semantics(format!("erode expects an outer set, got {s:?}"))),
    };
    let h = a.spacing();
    let semantics = if r as f64 * h >= radius + h { Semantics::Inner } else { Semantics::Eroded { radius } };
    Ok(erode_cells(a, r).with_semantics(semantics))
}
