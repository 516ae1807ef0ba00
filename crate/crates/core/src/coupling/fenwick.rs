/// Counts of set flags with prefix queries and order-statistic lookup.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub(crate) struct Fenwick {
    tree: Vec<u32>,
    total: u32,
}

impl Fenwick {
    pub fn from_flags(flags: impl ExactSizeIterator<Item = bool>) -> Self {
        let len = flags.len();
        let mut tree = vec![0u32; len + 1];
        let mut total = 0;
        for (i, f) in flags.enumerate() {
            tree[i + 1] = f as u32;
            total += f as u32;
        }
        // linear-time build
        for i in 1..=len {
            let parent = i + (i & i.wrapping_neg());
            if parent <= len {
                tree[parent] += tree[i];
            }
        }
        Fenwick { tree, total }
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn add(&mut self, i: usize, delta: i32) {
        self.total = (self.total as i64 + delta as i64) as u32;
        let mut k = i + 1;
        while k < self.tree.len() {
            self.tree[k] = (self.tree[k] as i64 + delta as i64) as u32;
            k += k & k.wrapping_neg();
        }
    }

    /// Number of set flags in `[0, i)`.
    pub fn prefix(&self, i: usize) -> u32 {
        let mut k = i;
        let mut s = 0;
        while k > 0 {
            s += self.tree[k];
            k -= k & k.wrapping_neg();
        }
        s
    }

    /// Index of the set flag with rank `r` (0-based); `r < total`.
    pub fn select(&self, r: u32) -> usize {
        let n = self.tree.len() - 1;
        let mut pos = 0;
        let mut rem = r + 1;
        let mut step = if n == 0 {
            0
        } else {
            1 << (usize::BITS - 1 - n.leading_zeros())
        };
        while step > 0 {
            let next = pos + step;
            if next <= n && self.tree[next] < rem {
                pos = next;
                rem -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}
