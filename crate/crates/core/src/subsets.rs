//! Lexicographic k-subset enumeration over `0..n`.

/// Iterator over all `k`-element subsets of `{0, .., n-1}` in lexicographic
/// order. Yields sorted index vectors.
pub(crate) struct Combinations {
    n: usize,
    k: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        let done = k > n;
        Combinations {
            n,
            k,
            current: (0..k).collect(),
            done,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        if self.k == 0 {
            self.done = true;
            return Some(out);
        }
        // Advance to the next combination; mark exhausted if none remains.
        let mut i = self.k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - self.k + i {
                self.current[i] += 1;
                for j in i + 1..self.k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Complement of a sorted index set within `0..n`.
pub(crate) fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(n - set.len());
    let mut it = set.iter().peekable();
    for i in 0..n {
        if it.peek() == Some(&&i) {
            it.next();
        } else {
            out.push(i);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_choose_two_in_lex_order() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
    }

    #[test]
    fn choose_zero_yields_only_empty_set() {
        let all: Vec<_> = Combinations::new(3, 0).collect();
        assert_eq!(all, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn choose_all_yields_full_set() {
        let all: Vec<_> = Combinations::new(3, 3).collect();
        assert_eq!(all, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn k_above_n_is_empty() {
        assert_eq!(Combinations::new(2, 3).count(), 0);
    }

    #[test]
    fn complement_interleaves() {
        assert_eq!(complement(5, &[1, 3]), vec![0, 2, 4]);
        assert_eq!(complement(3, &[]), vec![0, 1, 2]);
        assert_eq!(complement(3, &[0, 1, 2]), Vec::<usize>::new());
    }
}
