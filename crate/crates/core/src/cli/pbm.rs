use crate::grid::GridSet;
use std::io::Write;
use std::path::Path;

/// Renders a 2-D raster, or one axis slice of a 3-D raster, as ASCII PBM.
/// Row 0 is the highest `y`; in a slice the two remaining axes play `x`
/// and `y` in increasing order.
pub fn to_pbm(set: &GridSet, slice: Option<(usize, usize)>) -> Result<String, String> {
    let ext = set.geometry().extents().to_vec();
    let (x_axis, y_axis, fixed) = match (set.dim(), slice) {
        (2, None) => (0, 1, None),
        (3, Some((axis, index))) => {
            if axis > 2 {
                return Err(format!("slice axis {axis} is not 0, 1 or 2"));
            }
            if index >= ext[axis] {
                return Err(format!("slice index {index} is outside 0..{}", ext[axis]));
            }
            let rest: Vec<usize> = (0..3).filter(|&a| a != axis).collect();
            (rest[0], rest[1], Some((axis, index)))
        }
        (2, Some(_)) => return Err("2-D rasters take no slice".into()),
        (3, None) => return Err("3-D rasters need a slice".into()),
        (d, _) => return Err(format!("cannot draw a {d}-D raster")),
    };
    let (width, height) = (ext[x_axis], ext[y_axis]);
    let mut out = format!("P1\n{width} {height}\n");
    let mut idx = vec![0usize; set.dim()];
    if let Some((axis, index)) = fixed {
        idx[axis] = index;
    }
    for row in 0..height {
        idx[y_axis] = height - 1 - row;
        for col in 0..width {
            idx[x_axis] = col;
            if col > 0 {
                out.push(' ');
            }
            out.push(if set.get(&idx) { '1' } else { '0' });
        }
        out.push('\n');
    }
    Ok(out)
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::path::PathBuf::from("."),
    };
    let name = path.file_name().ok_or_else(|| std::io::Error::other("output path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = std::fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(contents)?;
        f.sync_all()
    });
    match result.and_then(|_| std::fs::rename(&tmp, path)) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridGeometry, Semantics};

    fn grid(extents: Vec<usize>, cells: &[Vec<i64>]) -> GridSet {
        let geom = GridGeometry::new(1.0, vec![0; extents.len()], extents).unwrap();
        let mut g = GridSet::empty(geom, Semantics::Inner).unwrap();
        for c in cells {
            let idx: Vec<usize> = c.iter().map(|&v| v as usize).collect();
            g.set(&idx, true);
        }
        g
    }

    #[test]
    fn golden_full_and_empty() {
        let full = grid(vec![2, 2], &[vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        assert_eq!(to_pbm(&full, None).unwrap(), "P1\n2 2\n1 1\n1 1\n");
        assert_eq!(to_pbm(&grid(vec![1, 1], &[]), None).unwrap(), "P1\n1 1\n0\n");
    }

    #[test]
    fn top_row_is_highest_y() {
        let g = grid(vec![3, 2], &[vec![2, 1], vec![0, 0]]);
        assert_eq!(to_pbm(&g, None).unwrap(), "P1\n3 2\n0 0 1\n1 0 0\n");
    }

    #[test]
    fn slices() {
        let g = grid(vec![2, 2, 2], &[vec![1, 0, 1]]);
        assert_eq!(to_pbm(&g, Some((0, 1))).unwrap(), "P1\n2 2\n1 0\n0 0\n");
        assert_eq!(to_pbm(&g, Some((2, 0))).unwrap(), "P1\n2 2\n0 0\n0 0\n");
        assert!(to_pbm(&g, Some((0, 2))).is_err());
        assert!(to_pbm(&g, None).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.pbm");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
