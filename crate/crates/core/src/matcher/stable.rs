/// Term-proposing deferred acceptance over a score matrix `scores[t][c]`.
///
/// Terms rank columns by descending score, ties to the lower column index.
/// Columns rank terms the same way, ties to the lower term index. Pairs
/// scoring below `floor` are unacceptable to both sides. Returns the column
/// assigned to each term.
pub fn deferred_acceptance(scores: &[Vec<f64>], floor: f64) -> Vec<Option<usize>> {
    let n_terms = scores.len();
    let n_cols = scores.iter().map(Vec::len).max().unwrap_or(0);
    let prefs: Vec<Vec<usize>> = scores
        .iter()
        .map(|row| {
            let mut cols: Vec<usize> = (0..row.len()).filter(|&c| row[c] >= floor).collect();
            cols.sort_by(|&x, &y| row[y].total_cmp(&row[x]).then(x.cmp(&y)));
            cols
        })
        .collect();
    let mut next = vec![0usize; n_terms];
    let mut holder: Vec<Option<usize>> = vec![None; n_cols];
    let mut assigned: Vec<Option<usize>> = vec![None; n_terms];
    let mut free: Vec<usize> = (0..n_terms).rev().collect();
    while let Some(t) = free.pop() {
        let Some(&c) = prefs[t].get(next[t]) else {
            continue;
        };
        next[t] += 1;
        match holder[c] {
            None => {
                holder[c] = Some(t);
                assigned[t] = Some(c);
            }
            Some(other) if column_prefers(scores, c, t, other) => {
                holder[c] = Some(t);
                assigned[t] = Some(c);
                assigned[other] = None;
                free.push(other);
            }
            Some(_) => free.push(t),
        }
    }
    assigned
}

/// Whether column `c` strictly prefers term `a` over term `b`.
pub fn column_prefers(scores: &[Vec<f64>], c: usize, a: usize, b: usize) -> bool {
    match scores[a][c].total_cmp(&scores[b][c]) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a < b,
    }
}

/// Whether term `t` strictly prefers column `a` over column `b`.
pub fn term_prefers(scores: &[Vec<f64>], t: usize, a: usize, b: usize) -> bool {
    match scores[t][a].total_cmp(&scores[t][b]) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => a < b,
    }
}

/// A pair that would rather be together than with their current partners,
/// judged on raw scores (ties never block).
pub fn blocking_pair(
    scores: &[Vec<f64>],
    floor: f64,
    m: &[Option<usize>],
) -> Option<(usize, usize)> {
    let mut holder = vec![None; scores.iter().map(Vec::len).max().unwrap_or(0)];
    for (t, c) in m.iter().enumerate() {
        if let Some(c) = c {
            holder[*c] = Some(t);
        }
    }
    for (t, row) in scores.iter().enumerate() {
        for (c, &s) in row.iter().enumerate() {
            if s < floor || m[t] == Some(c) {
                continue;
            }
            let term_wants = m[t].is_none_or(|cur| s > scores[t][cur]);
            let col_wants = holder[c].is_none_or(|cur: usize| s > scores[cur][c]);
            if term_wants && col_wants {
                return Some((t, c));
            }
        }
    }
    None
}
