use crate::error::{Error, Result};

/// Exact measure of the union of boxes `[p, reference]` over the points of
/// `front`. Points not strictly better than `reference` in every objective
/// span nothing and are ignored. Two objectives use a sorted sweep, three a
/// sweep over the third objective with a 2D measure per slab.
pub fn hypervolume<P: AsRef<[f64]>>(front: &[P], reference: &[f64]) -> Result<f64> {
    let d = reference.len();
    if !(2..=3).contains(&d) {
        return Err(Error::Dimension(d));
    }
    if let Some(p) = front.iter().find(|p| p.as_ref().len() != d) {
        return Err(Error::Dimension(p.as_ref().len()));
    }
    let pts: Vec<&[f64]> = front
        .iter()
        .map(AsRef::as_ref)
        .filter(|p| p.iter().zip(reference).all(|(x, r)| x < r))
        .collect();
    Ok(if d == 2 {
        let mut xy: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
        area(&mut xy, reference[0], reference[1])
    } else {
        volume(&pts, reference)
    })
}

fn area(pts: &mut [(f64, f64)], rx: f64, ry: f64) -> f64 {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut total = 0.0;
    let mut best_y = ry;
    for (i, &(x, y)) in pts.iter().enumerate() {
        if y < best_y {
            best_y = y;
        }
        let next_x = pts.get(i + 1).map_or(rx, |p| p.0);
        total += (next_x - x) * (ry - best_y);
    }
    total
}

fn volume(pts: &[&[f64]], r: &[f64]) -> f64 {
    let mut by_z: Vec<&[f64]> = pts.to_vec();
    by_z.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut total = 0.0;
    let mut slab: Vec<(f64, f64)> = Vec::with_capacity(by_z.len());
    for (i, p) in by_z.iter().enumerate() {
        slab.push((p[0], p[1]));
        let next_z = by_z.get(i + 1).map_or(r[2], |q| q[2]);
        if next_z > p[2] {
            total += area(&mut slab, r[0], r[1]) * (next_z - p[2]);
        }
    }
    total
}
