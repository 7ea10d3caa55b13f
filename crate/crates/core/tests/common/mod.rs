//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 60)
}

/// Lognormal density written out directly from its definition.
pub fn lognormal_density(c: f64, mu: f64, sigma: f64) -> f64 {
    let z = (c.ln() - mu) / sigma;
    (-0.5 * z * z).exp() / ((2.0 * std::f64::consts::PI).sqrt() * c * sigma)
}

/// `integral_{c_a}^{inf} p(C) dC`, integrated in `t = ln C` (so `dC = C dt`)
/// and split into unit-sigma panels out to `mu + 14 sigma`.
pub fn upper_tail_by_quadrature(mu: f64, sigma: f64, c_a: f64) -> f64 {
    let lo = c_a.ln();
    let hi = mu + 14.0 * sigma;
    if lo >= hi {
        return 0.0;
    }
    let g = |t: f64| {
        let c = t.exp();
        lognormal_density(c, mu, sigma) * c
    };
    let panels = (((hi - lo) / sigma).ceil() as usize).max(1);
    let width = (hi - lo) / panels as f64;
    (0..panels)
        .map(|i| {
            let a = lo + i as f64 * width;
            adaptive_simpson(&g, a, a + width, 1e-13)
        })
        .sum()
}

/// Expected top-`x%` membership of every paper, by enumerating every ordering
/// that breaks ties among equal citation counts. Each ordering gives the paper
/// at rank `r` the weight `clamp(x n / 100 - (r - 1), 0, 1)`.
pub fn tie_expectation_by_enumeration(values: &[u64], levels: &[f64]) -> Vec<Vec<f64>> {
    let n = values.len();
    let mut distinct: Vec<u64> = values.to_vec();
    distinct.sort_unstable_by(|a, b| b.cmp(a));
    distinct.dedup();
    let groups: Vec<Vec<usize>> = distinct.iter().map(|&v| (0..n).filter(|&i| values[i] == v).collect()).collect();
    let perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|g| permutations(g)).collect();

    let mut sums = vec![vec![0.0; n]; levels.len()];
    let mut count = 0u64;
    let mut choice = vec![0usize; groups.len()];
    loop {
        // ranks for this ordering
        let mut rank = 0usize;
        for (g, &c) in choice.iter().enumerate() {
            for &paper in &perms[g][c] {
                rank += 1;
                for (li, &x) in levels.iter().enumerate() {
                    let slots = x * n as f64 / 100.0;
                    sums[li][paper] += (slots - (rank - 1) as f64).clamp(0.0, 1.0);
                }
            }
        }
        count += 1;
        // odometer over the per-group permutation choices
        let mut g = 0;
        loop {
            if g == choice.len() {
                for row in &mut sums {
                    for v in row.iter_mut() {
                        *v /= count as f64;
                    }
                }
                return sums;
            }
            choice[g] += 1;
            if choice[g] < perms[g].len() {
                break;
            }
            choice[g] = 0;
            g += 1;
        }
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Every sequence of length `n` over `alphabet`.
pub fn all_sequences(alphabet: &[u64], n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|s| {
                alphabet.iter().map(move |&a| {
                    let mut t = s.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Half-width of a `k`-sigma binomial band for proportion `p` over `n` trials.
pub fn binomial_band(p: f64, n: usize, k: f64) -> f64 {
    k * (p * (1.0 - p) / n as f64).sqrt()
}

/// Dvoretzky-Kiefer-Wolfowitz band half-width at confidence `1 - alpha`.
pub fn dkw_band(n: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt()
}
