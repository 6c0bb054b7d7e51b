/// Calls `f` once per perfect matching of `0..n` (n even), pairs min-first,
/// in lexicographic order of the pair list.
pub(crate) fn for_each_pairing(n: usize, mut f: impl FnMut(&[(usize, usize)])) {
    let mut used = vec![false; n];
    let mut pairs = Vec::with_capacity(n / 2);
    recurse(&mut used, &mut pairs, &mut f);
}

fn recurse(
    used: &mut [bool],
    pairs: &mut Vec<(usize, usize)>,
    f: &mut impl FnMut(&[(usize, usize)]),
) {
    let Some(first) = used.iter().position(|u| !u) else {
        f(pairs);
        return;
    };
    used[first] = true;
    for second in first + 1..used.len() {
        if used[second] {
            continue;
        }
        used[second] = true;
        pairs.push((first, second));
        recurse(used, pairs, f);
        pairs.pop();
        used[second] = false;
    }
    used[first] = false;
}

/// Number of perfect matchings of `n` points, `(n-1)!!`.
pub(crate) fn double_factorial_odd(n: usize) -> u128 {
    (1..n).step_by(2).map(|x| x as u128).product()
}
