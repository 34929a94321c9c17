use crate::embedding::{l2, EmbeddingVector};

/// Exact fixed-radius search over a static point set.
///
/// Points are sorted by distance to a first pivot (the origin) and carry their
/// distance to a second pivot; the triangle inequality on both prunes most
/// candidates before a full distance is computed.
pub struct RangeIndex<'a> {
    points: Vec<&'a [f64]>,
    order: Vec<usize>,
    d0: Vec<f64>,
    d1: Vec<f64>,
    pivot: Vec<f64>,
}

impl<'a> RangeIndex<'a> {
    pub fn new(points: impl IntoIterator<Item = &'a EmbeddingVector>) -> Self {
        let points: Vec<&[f64]> = points.into_iter().map(|p| p.as_slice()).collect();
        let norm = |p: &[f64]| p.iter().map(|c| c * c).sum::<f64>().sqrt();
        let d0_raw: Vec<f64> = points.iter().map(|p| norm(p)).collect();
        let pivot: Vec<f64> = points
            .iter()
            .zip(&d0_raw)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(p, _)| p.to_vec())
            .unwrap_or_default();
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| d0_raw[a].total_cmp(&d0_raw[b]).then(a.cmp(&b)));
        let d0 = order.iter().map(|&i| d0_raw[i]).collect();
        let d1 = order
            .iter()
            .map(|&i| if pivot.is_empty() { 0.0 } else { l2(points[i], &pivot) })
            .collect();
        Self {
            points,
            order,
            d0,
            d1,
            pivot,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices of all points within `radius` of `query` (closed ball), ascending.
    pub fn within(&self, query: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.points.is_empty() {
            return out;
        }
        let q0 = query.iter().map(|c| c * c).sum::<f64>().sqrt();
        let q1 = l2(query, &self.pivot);
        // pad the window so rounding in the pivot distances never drops a true hit
        let slack = radius + 1e-12 * (1.0 + q0);
        let lo = self.d0.partition_point(|&d| d < q0 - slack);
        for pos in lo..self.d0.len() {
            if self.d0[pos] > q0 + slack {
                break;
            }
            if (self.d1[pos] - q1).abs() > slack {
                continue;
            }
            let i = self.order[pos];
            if l2(self.points[i], query) <= radius {
                out.push(i);
            }
        }
        out.sort_unstable();
        out
    }
}
