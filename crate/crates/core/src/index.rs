//! Multi-indices as bit masks: bit `i` stands for the coordinate `u_{i+1}`.

use alloc::string::String;
use alloc::vec::Vec;

pub type Mask = u32;

pub fn size(m: Mask) -> usize {
    m.count_ones() as usize
}

pub fn full(n: usize) -> Mask {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

pub fn from_indices(ix: &[usize]) -> Mask {
    ix.iter().fold(0, |m, &i| m | (1 << i))
}

/// Builds a mask from 1-based indices, rejecting repeats and out-of-range entries.
pub fn from_one_based(ix: &[usize], n: usize) -> Option<Mask> {
    let mut m = 0u32;
    for &i in ix {
        if i == 0 || i > n || m & (1 << (i - 1)) != 0 {
            return None;
        }
        m |= 1 << (i - 1);
    }
    Some(m)
}

pub fn elements(m: Mask) -> Vec<usize> {
    (0..32).filter(|i| m & (1 << i) != 0).collect()
}

pub fn one_based(m: Mask) -> Vec<usize> {
    elements(m).into_iter().map(|i| i + 1).collect()
}

/// Renders `{1,3}` style.
pub fn label(m: Mask) -> String {
    let parts: Vec<String> = one_based(m).iter().map(|i| alloc::format!("{i}")).collect();
    alloc::format!("{{{}}}", parts.join(","))
}

/// All `k`-subsets of `{0..n}` in lexicographic order of their sorted element lists.
pub fn subsets(n: usize, k: usize) -> Vec<Mask> {
    fn rec(start: usize, n: usize, k: usize, acc: Mask, out: &mut Vec<Mask>) {
        if k == 0 {
            out.push(acc);
            return;
        }
        for i in start..n {
            if n - i < k {
                break;
            }
            rec(i + 1, n, k - 1, acc | (1 << i), out);
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, 0, &mut out);
    }
    out
}

/// All subsets of `m`, including empty and `m` itself.
pub fn submasks(m: Mask) -> Vec<Mask> {
    let mut out = Vec::new();
    let mut s = m;
    loop {
        out.push(s);
        if s == 0 {
            break;
        }
        s = (s - 1) & m;
    }
    out.reverse();
    out
}

/// Sign of `e_a ∧ e_b = ± e_{a∪b}` for sorted wedge monomials, `0` if they overlap.
pub fn merge_sign(a: Mask, b: Mask) -> i64 {
    if a & b != 0 {
        return 0;
    }
    let mut inversions = 0usize;
    for j in elements(b) {
        inversions += size(a & !((1u32 << (j + 1)) - 1));
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Position of `m` in `subsets(n, size(m))`.
pub fn rank_of(list: &[Mask], m: Mask) -> Option<usize> {
    list.iter().position(|&x| x == m)
}
