//! Rank correlations with tie handling: Spearman's rho over average ranks
//! and tie-corrected Kendall's tau (tau-b).
//!
//! The tau implementation follows the sort-and-merge-count approach
//! (O(n log n)): after sorting by (x, y), the number of merge-sort
//! exchanges needed to order y counts the discordant pairs, and tied-pair
//! counts correct the denominator. Independent pair-counting oracles live
//! in the test suite.

use super::CheckEvalError;

fn validate(x: &[f64], y: &[f64]) -> Result<(), CheckEvalError> {
    if x.len() != y.len() {
        return Err(CheckEvalError::DimensionMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(CheckEvalError::InsufficientLength(x.len()));
    }
    Ok(())
}

/// Average ranks (1-based); tied values share the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // positions i..=j (0-based) share rank mean of (i+1)..=(j+1)
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of the average-ranked inputs.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, CheckEvalError> {
    validate(x, y)?;
    let rx = average_ranks(x);
    let ry = average_ranks(y);

    let n = rx.len() as f64;
    let mean_x = rx.iter().sum::<f64>() / n;
    let mean_y = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(CheckEvalError::Undefined("x ranks"));
    }
    if syy == 0.0 {
        return Err(CheckEvalError::Undefined("y ranks"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Merge sort counting the exchanges needed to order the slice ascending;
/// equal elements are not exchanges.
fn merge_count(values: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = values.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut values[..mid], buf) + merge_count(&mut values[mid..], buf);
    let (left, right) = values.split_at(mid);
    let mut i = 0;
    let mut j = 0;
    let mut k = 0;
    while i < left.len() && j < right.len() {
        if right[j] < left[i] {
            swaps += (left.len() - i) as u64;
            buf[k] = right[j];
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    values.copy_from_slice(&buf[..n]);
    swaps
}

/// Pairs within runs of equal keys: Σ t·(t−1)/2.
fn tied_pairs<K: PartialEq>(sorted: &[K]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for i in 1..sorted.len() {
        if sorted[i] == sorted[i - 1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Kendall's tau-b over all pairs.
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64, CheckEvalError> {
    validate(x, y)?;
    let n = x.len();

    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .expect("finite values")
            .then(a.1.partial_cmp(&b.1).expect("finite values"))
    });

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&xs);
    let joint: Vec<(f64, f64)> = pairs.clone();
    let n12 = tied_pairs(&joint);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; ys.len()];
    let swaps = merge_count(&mut ys, &mut buf);
    // ys is now sorted; count y ties on it.
    let n2 = tied_pairs(&ys);

    if n0 == n1 {
        return Err(CheckEvalError::Undefined("x"));
    }
    if n0 == n2 {
        return Err(CheckEvalError::Undefined("y"));
    }

    let concordant_minus_discordant =
        n0 as i64 - n1 as i64 - n2 as i64 + n12 as i64 - 2 * swaps as i64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok((concordant_minus_discordant as f64 / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Definition-level oracle: rank both inputs with average ties, then
    /// apply the textbook Pearson formula term by term.
    fn spearman_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
        fn ranks(values: &[f64]) -> Vec<f64> {
            values
                .iter()
                .map(|&v| {
                    let less = values.iter().filter(|&&w| w < v).count() as f64;
                    let equal = values.iter().filter(|&&w| w == v).count() as f64;
                    // average of positions less+1 ..= less+equal
                    less + (equal + 1.0) / 2.0
                })
                .collect()
        }
        let rx = ranks(x);
        let ry = ranks(y);
        let n = rx.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let sxy: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let syy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
        if sxx == 0.0 || syy == 0.0 {
            return None;
        }
        Some(sxy / (sxx * syy).sqrt())
    }

    /// Definition-level oracle: count concordant, discordant, and tied
    /// pairs exhaustively.
    fn kendall_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
        let n = x.len();
        let mut concordant = 0i64;
        let mut discordant = 0i64;
        let mut tied_x = 0i64;
        let mut tied_y = 0i64;
        for i in 0..n {
            for j in (i + 1)..n {
                let dx = x[i] - x[j];
                let dy = y[i] - y[j];
                if dx == 0.0 && dy == 0.0 {
                    // joint tie: counts toward neither correction
                } else if dx == 0.0 {
                    tied_x += 1;
                } else if dy == 0.0 {
                    tied_y += 1;
                } else if dx * dy > 0.0 {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
        let denom_x = concordant + discordant + tied_x;
        let denom_y = concordant + discordant + tied_y;
        if denom_x == 0 || denom_y == 0 {
            return None;
        }
        Some((concordant - discordant) as f64 / ((denom_x as f64) * (denom_y as f64)).sqrt())
    }

    #[test]
    fn identical_rankings_are_exactly_one() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(spearman(&x, &x).unwrap(), 1.0);
        assert_eq!(kendall_tau(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn reversed_rankings_are_exactly_minus_one() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [5.0, 4.0, 3.0, 2.0, 1.0];
        assert_eq!(spearman(&x, &y).unwrap(), -1.0);
        assert_eq!(kendall_tau(&x, &y).unwrap(), -1.0);
    }

    #[test]
    fn tied_example_matches_oracles() {
        let x = [1.0, 2.0, 2.0, 4.0];
        let y = [1.0, 3.0, 2.0, 4.0];
        let rho = spearman(&x, &y).unwrap();
        let tau = kendall_tau(&x, &y).unwrap();
        assert!((rho - spearman_oracle(&x, &y).unwrap()).abs() < 1e-12);
        assert!((tau - kendall_oracle(&x, &y).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            spearman(&[1.0, 2.0], &[1.0]),
            Err(CheckEvalError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            kendall_tau(&[1.0], &[1.0, 2.0]),
            Err(CheckEvalError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn single_element_is_too_short() {
        assert!(matches!(
            spearman(&[1.0], &[1.0]),
            Err(CheckEvalError::InsufficientLength(1))
        ));
    }

    #[test]
    fn constant_input_is_undefined() {
        assert!(matches!(
            spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(CheckEvalError::Undefined(_))
        ));
        assert!(matches!(
            kendall_tau(&[1.0, 2.0, 3.0], &[7.0, 7.0, 7.0]),
            Err(CheckEvalError::Undefined(_))
        ));
    }

    #[test]
    fn average_ranks_handle_ties() {
        assert_eq!(average_ranks(&[10.0, 20.0, 20.0, 40.0]), vec![1.0, 2.5, 2.5, 4.0]);
        assert_eq!(average_ranks(&[3.0, 1.0, 2.0]), vec![3.0, 1.0, 2.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1200))]

        #[test]
        fn matches_pair_count_oracles_up_to_len_8(
            // Small value domain forces plenty of ties.
            pairs in proptest::collection::vec((0i8..6, 0i8..6), 2..=8),
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();

            match (kendall_tau(&x, &y), kendall_oracle(&x, &y)) {
                (Ok(mine), Some(oracle)) => prop_assert!(
                    (mine - oracle).abs() < 1e-12,
                    "tau {mine} vs oracle {oracle} on x={x:?} y={y:?}"
                ),
                (Err(_), None) => {}
                (mine, oracle) => prop_assert!(
                    false,
                    "tau disagreement on defined-ness: {mine:?} vs {oracle:?} (x={x:?} y={y:?})"
                ),
            }

            match (spearman(&x, &y), spearman_oracle(&x, &y)) {
                (Ok(mine), Some(oracle)) => prop_assert!(
                    (mine - oracle).abs() < 1e-9,
                    "rho {mine} vs oracle {oracle} on x={x:?} y={y:?}"
                ),
                (Err(_), None) => {}
                (mine, oracle) => prop_assert!(
                    false,
                    "rho disagreement on defined-ness: {mine:?} vs {oracle:?} (x={x:?} y={y:?})"
                ),
            }
        }

        #[test]
        fn invariant_under_strictly_monotone_transforms(
            values in proptest::collection::vec((0i8..10, 0i8..10), 3..=12),
        ) {
            let x: Vec<f64> = values.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = values.iter().map(|p| p.1 as f64).collect();
            // Strictly monotone transforms preserve all orderings and ties.
            let tx: Vec<f64> = x.iter().map(|v| (v * 3.0 + 1.0).exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| v * 100.0 - 7.0).collect();

            if let (Ok(a), Ok(b)) = (spearman(&x, &y), spearman(&tx, &ty)) {
                prop_assert!((a - b).abs() < 1e-9, "rho not invariant: {a} vs {b}");
            }
            if let (Ok(a), Ok(b)) = (kendall_tau(&x, &y), kendall_tau(&tx, &ty)) {
                prop_assert!((a - b).abs() < 1e-12, "tau not invariant: {a} vs {b}");
            }
        }
    }
}
