use super::{lex, non_dominated_sort};
use crate::error::{Error, Result};

/// Das–Dennis points on the unit simplex with `divisions` steps per objective.
pub fn das_dennis(objectives: usize, divisions: usize) -> Vec<Vec<f64>> {
    fn rec(left: usize, dims: usize, divisions: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if dims == 1 {
            cur.push(left);
            out.push(cur.iter().map(|&k| k as f64 / divisions as f64).collect());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(left - k, dims - 1, divisions, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if objectives == 0 || divisions == 0 {
        return out;
    }
    rec(divisions, objectives, divisions, &mut Vec::new(), &mut out);
    out
}

/// 12 divisions for two objectives, 6 for three or more.
pub fn default_divisions(objectives: usize) -> usize {
    if objectives <= 2 {
        12
    } else {
        6
    }
}

/// Picks `n` of `points` (returned as ascending indices): whole
/// non-dominated layers first, then members of the boundary layer chosen by
/// reference-point niching on objectives normalized to the candidates'
/// ideal and nadir. Ties are broken by content (objective values), so the
/// selected set does not depend on input order.
pub fn nsga3_select<P: AsRef<[f64]>>(points: &[P], n: usize, divisions: usize) -> Result<Vec<usize>> {
    if n > points.len() {
        return Err(Error::SelectionTooLarge {
            requested: n,
            available: points.len(),
        });
    }
    let mut chosen = Vec::with_capacity(n);
    let mut boundary = Vec::new();
    for layer in non_dominated_sort(points) {
        if chosen.len() + layer.len() <= n {
            chosen.extend(layer);
            if chosen.len() == n {
                break;
            }
        } else {
            boundary = layer;
            break;
        }
    }
    if chosen.len() < n {
        let extra = niche(points, &chosen, &boundary, n - chosen.len(), divisions);
        chosen.extend(extra);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

fn niche<P: AsRef<[f64]>>(points: &[P], chosen: &[usize], boundary: &[usize], k: usize, divisions: usize) -> Vec<usize> {
    let m = points[boundary[0]].as_ref().len();
    let all: Vec<usize> = chosen.iter().chain(boundary).copied().collect();
    let mut ideal = vec![f64::INFINITY; m];
    let mut nadir = vec![f64::NEG_INFINITY; m];
    for &i in &all {
        for (j, &v) in points[i].as_ref().iter().enumerate() {
            ideal[j] = ideal[j].min(v);
            nadir[j] = nadir[j].max(v);
        }
    }
    let normalized = |i: usize| -> Vec<f64> {
        points[i]
            .as_ref()
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = nadir[j] - ideal[j];
                if span > 0.0 {
                    (v - ideal[j]) / span
                } else {
                    0.0
                }
            })
            .collect()
    };
    let refs = das_dennis(m, divisions.max(1));
    let associate = |i: usize| -> (usize, f64) {
        let x = normalized(i);
        let mut best = (0, f64::INFINITY);
        for (r, w) in refs.iter().enumerate() {
            let norm2: f64 = w.iter().map(|v| v * v).sum();
            let dot: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
            let t = dot / norm2;
            let dist2: f64 = x.iter().zip(w).map(|(a, b)| (a - t * b).powi(2)).sum();
            if dist2 < best.1 - 1e-12 {
                best = (r, dist2);
            }
        }
        best
    };
    let mut rho = vec![0usize; refs.len()];
    for &i in chosen {
        rho[associate(i).0] += 1;
    }
    let mut pool: Vec<(usize, usize, f64)> = boundary
        .iter()
        .map(|&i| {
            let (r, d) = associate(i);
            (i, r, d)
        })
        .collect();
    let content = |a: usize, b: usize| lex(points[a].as_ref(), points[b].as_ref());
    let mut excluded = vec![false; refs.len()];
    let mut out = Vec::with_capacity(k);
    while out.len() < k {
        let Some(j) = (0..refs.len()).filter(|&r| !excluded[r]).min_by_key(|&r| (rho[r], r)) else {
            break;
        };
        let members: Vec<usize> = (0..pool.len()).filter(|&p| pool[p].1 == j).collect();
        if members.is_empty() {
            excluded[j] = true;
            continue;
        }
        let pick = if rho[j] == 0 {
            *members
                .iter()
                .min_by(|&&a, &&b| {
                    pool[a]
                        .2
                        .total_cmp(&pool[b].2)
                        .then_with(|| content(pool[a].0, pool[b].0))
                })
                .expect("non-empty")
        } else {
            *members
                .iter()
                .min_by(|&&a, &&b| content(pool[a].0, pool[b].0))
                .expect("non-empty")
        };
        out.push(pool[pick].0);
        pool.swap_remove(pick);
        rho[j] += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn das_dennis_counts() {
        assert_eq!(das_dennis(2, 12).len(), 13);
        assert_eq!(das_dennis(3, 6).len(), 28);
        for w in das_dennis(3, 6) {
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn selecting_everything_or_the_front() {
        let pts = vec![[1.0, 4.0], [2.0, 2.0], [4.0, 1.0], [3.0, 3.0], [5.0, 5.0]];
        assert_eq!(nsga3_select(&pts, 5, 12).unwrap(), vec![0, 1, 2, 3, 4]);
        assert_eq!(nsga3_select(&pts, 3, 12).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            nsga3_select(&pts, 6, 12),
            Err(Error::SelectionTooLarge { .. })
        ));
    }

    #[test]
    fn niching_keeps_both_clusters() {
        let mut pts = Vec::new();
        for i in 0..10 {
            let e = i as f64 * 0.01;
            pts.push([e, 10.0 - e]);
            pts.push([10.0 - e, e]);
        }
        let sel = nsga3_select(&pts, 10, 12).unwrap();
        assert!(sel.iter().any(|&i| pts[i][0] < 1.0));
        assert!(sel.iter().any(|&i| pts[i][0] > 9.0));
    }

    #[test]
    fn permutation_invariant_as_set() {
        let pts: Vec<[f64; 3]> = (0..30)
            .map(|i| {
                let a = (i * 7 % 13) as f64;
                let b = (i * 5 % 11) as f64;
                [a, b, 20.0 - a - b]
            })
            .collect();
        let mut rev = pts.clone();
        rev.reverse();
        let a: Vec<[u64; 3]> = {
            let mut v: Vec<_> = nsga3_select(&pts, 12, 6)
                .unwrap()
                .iter()
                .map(|&i| pts[i].map(f64::to_bits))
                .collect();
            v.sort();
            v
        };
        let b: Vec<[u64; 3]> = {
            let mut v: Vec<_> = nsga3_select(&rev, 12, 6)
                .unwrap()
                .iter()
                .map(|&i| rev[i].map(f64::to_bits))
                .collect();
            v.sort();
            v
        };
        assert_eq!(a, b);
    }
}
