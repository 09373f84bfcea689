//! Delta-debugging minimization (ddmin) over byte chunks with the classic
//! halving granularity schedule.

use crate::targets::Target;

/// Upper bound on check invocations per minimization, so pathological
/// inputs cannot stall a run.
const MAX_CHECKS: usize = 20_000;

/// Minimizes a failing input: the result still fails, is no longer than the
/// input, and is 1-minimal with respect to ddmin's chunk schedule (unless
/// the check budget runs out first).
pub fn minimize_case(target: &Target, bytes: &[u8]) -> Vec<u8> {
    let mut budget = MAX_CHECKS;
    let mut fails = |candidate: &[u8]| -> bool {
        if budget == 0 {
            return false;
        }
        budget -= 1;
        (target.check)(candidate).is_fail()
    };
    debug_assert!((target.check)(bytes).is_fail());

    let mut current = bytes.to_vec();
    let mut granularity = 2usize;
    while current.len() >= 2 {
        let chunks = chunk_ranges(current.len(), granularity);
        let mut reduced = false;

        // Try each chunk alone.
        for range in &chunks {
            let candidate = current[range.clone()].to_vec();
            if candidate.len() < current.len() && fails(&candidate) {
                current = candidate;
                granularity = 2;
                reduced = true;
                break;
            }
        }
        // Then each complement.
        if !reduced {
            for range in &chunks {
                let mut candidate = Vec::with_capacity(current.len());
                candidate.extend_from_slice(&current[..range.start]);
                candidate.extend_from_slice(&current[range.end..]);
                if candidate.len() < current.len() && fails(&candidate) {
                    current = candidate;
                    granularity = granularity.saturating_sub(1).max(2);
                    reduced = true;
                    break;
                }
            }
        }
        if !reduced {
            if granularity >= current.len() {
                break;
            }
            granularity = (granularity * 2).min(current.len());
        }
    }
    current
}

fn chunk_ranges(len: usize, n: usize) -> Vec<std::ops::Range<usize>> {
    let n = n.min(len).max(1);
    let base = len / n;
    let extra = len % n;
    let mut ranges = Vec::with_capacity(n);
    let mut start = 0;
    for i in 0..n {
        let size = base + usize::from(i < extra);
        ranges.push(start..start + size);
        start += size;
    }
    ranges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::targets::Verdict;

    /// Fails whenever the input contains the byte `0xAB` before `0xCD`.
    fn toy_check(bytes: &[u8]) -> Verdict {
        let a = bytes.iter().position(|&b| b == 0xAB);
        let c = bytes.iter().position(|&b| b == 0xCD);
        match (a, c) {
            (Some(i), Some(j)) if i < j => Verdict::Fail("ab before cd".to_string()),
            _ => Verdict::Pass,
        }
    }

    const TOY: Target = Target {
        name: "toy",
        check: toy_check,
    };

    #[test]
    fn strips_irrelevant_bytes() {
        let mut input = vec![1u8; 512];
        input[100] = 0xAB;
        input[200] = 0xCD;
        input.extend_from_slice(&[9u8; 1024]); // trailing ignored bytes
        let min = minimize_case(&TOY, &input);
        assert_eq!(min, vec![0xAB, 0xCD]);
    }

    #[test]
    fn minimal_input_is_returned_unchanged() {
        let input = vec![0xAB, 0xCD];
        assert_eq!(minimize_case(&TOY, &input), input);
    }

    #[test]
    fn minimized_output_still_fails() {
        let mut input: Vec<u8> = (0..=255).collect();
        input.push(0xCD);
        let min = minimize_case(&TOY, &input);
        assert!(toy_check(&min).is_fail());
        assert!(min.len() <= input.len());
    }

    #[test]
    fn chunking_covers_input_exactly() {
        for len in [1usize, 2, 7, 16, 33] {
            for n in [1usize, 2, 3, 8, 64] {
                let ranges = chunk_ranges(len, n);
                assert_eq!(ranges.first().map(|r| r.start), Some(0));
                assert_eq!(ranges.last().map(|r| r.end), Some(len));
                for pair in ranges.windows(2) {
                    assert_eq!(pair[0].end, pair[1].start);
                }
            }
        }
    }
}
