use ndarray::Array2;

/// Area-average resampling: each output cell is the mean of the input over
/// the rectangle it covers, with fractional coverage at the edges.
pub fn resize_area(src: &Array2<f64>, rows: usize, cols: usize) -> Array2<f64> {
    let (sr, sc) = src.dim();
    let row_w = weights(sr, rows);
    let col_w = weights(sc, cols);
    let mut out = Array2::zeros((rows, cols));
    for (i, rw) in row_w.iter().enumerate() {
        for (j, cw) in col_w.iter().enumerate() {
            let mut acc = 0.0;
            let mut total = 0.0;
            for &(r, a) in rw {
                for &(c, b) in cw {
                    acc += src[(r, c)] * a * b;
                    total += a * b;
                }
            }
            out[(i, j)] = acc / total;
        }
    }
    out
}

/// For each of `dst` output cells, the source cells it overlaps and by how much.
fn weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|i| {
            let (lo, hi) = (i as f64 * scale, (i + 1) as f64 * scale);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(src);
            (first..last)
                .filter_map(|s| {
                    let overlap = (hi.min(s as f64 + 1.0) - lo.max(s as f64)).max(0.0);
                    (overlap > 0.0).then_some((s, overlap))
                })
                .collect()
        })
        .collect()
}

/// Output column range `[start, end)` whose covered source span has its
/// midpoint inside the source range `[lo, hi)`.
pub fn map_range_to_cells(lo: f64, hi: f64, src: usize, dst: usize) -> (usize, usize) {
    let scale = src as f64 / dst as f64;
    let inside = |i: usize| {
        let mid = (i as f64 + 0.5) * scale;
        mid >= lo && mid < hi
    };
    let start = (0..dst).find(|&i| inside(i)).unwrap_or(dst);
    let end = (start..dst).find(|&i| !inside(i)).unwrap_or(dst);
    (start, end)
}
