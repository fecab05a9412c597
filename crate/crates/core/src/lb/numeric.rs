use crate::error::{param, Result};
use crate::prf::SharedRandomness;
use rand::Rng;

/// `H₂(p)` in bits.
pub fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn xlog2x(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.log2()
    }
}

/// `I(X; Y)` for `X` uniform on `[n]` and `Y = X` with probability `p`,
/// otherwise uniform on `[n]`: `log₂ n − H(Y | X)`.
pub fn mixture_mutual_information(n: u64, p: f64) -> f64 {
    let nf = n as f64;
    let same = p + (1.0 - p) / nf;
    let other = (1.0 - p) / nf;
    let h_cond = -xlog2x(same) - (nf - 1.0) * xlog2x(other);
    nf.log2() - h_cond
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivityRecord {
    pub n: u64,
    pub t: f64,
    pub trials: u64,
    /// Monte Carlo estimate of `Pr(X = Y)`.
    pub measured_p: f64,
    /// `t / log₂ n + (1 − t / log₂ n) / n`.
    pub exact_p: f64,
    pub mutual_information: f64,
    /// `(I(X;Y) + H₂(1/n)) / log₂ n`.
    pub analytic_rhs: f64,
    /// `(I(X;Y) + H₂(Pr(X = Y))) / log₂ n`, the bound with the entropy of
    /// the event itself.
    pub event_entropy_rhs: f64,
}

/// Estimates how often a query correlated with the secret hits a
/// `1/n`-probability event, and compares with the information bound.
pub fn adaptivity_experiment(n: u64, t: f64, trials: u64, seed: u64) -> Result<AdaptivityRecord> {
    if n < 2 || !n.is_power_of_two() {
        return param(format!("n = {n} must be a power of two, at least 2"));
    }
    let log_n = f64::from(n.trailing_zeros());
    if !(0.0..=log_n).contains(&t) {
        return param(format!("need 0 ≤ t ≤ log₂ n = {log_n}, got {t}"));
    }
    if trials == 0 {
        return param("need at least one trial");
    }
    let p = t / log_n;
    let mut rng = SharedRandomness::new(seed).rng("adaptivity", &[]);
    let mut hits = 0u64;
    for _ in 0..trials {
        let x = rng.random_range(0..n);
        let y = if rng.random::<f64>() < p { x } else { rng.random_range(0..n) };
        hits += u64::from(x == y);
    }
    let measured_p = hits as f64 / trials as f64;
    let exact_p = p + (1.0 - p) / n as f64;
    let mi = mixture_mutual_information(n, p);
    Ok(AdaptivityRecord {
        n,
        t,
        trials,
        measured_p,
        exact_p,
        mutual_information: mi,
        analytic_rhs: (mi + binary_entropy(1.0 / n as f64)) / log_n,
        event_entropy_rhs: (mi + binary_entropy(exact_p)) / log_n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PochhammerRecord {
    pub k: u32,
    pub terms: u64,
    /// `log₂ ∏_{j=1..J} 1/(1 − 2^{−j/K})`.
    pub log2_product: f64,
    pub product: f64,
    /// `5K`.
    pub log2_bound: f64,
    pub pass: bool,
}

/// `∏_{j=1..J} 1/(1 − 2^{−j/K})` against `2^{5K}`, summed in the log
/// domain with compensation.
pub fn pochhammer_check(k: u32, terms: u64) -> Result<PochhammerRecord> {
    if k == 0 {
        return param("K must be at least 1");
    }
    if terms < 200 * u64::from(k) {
        return param(format!("need J ≥ 200K = {}, got {terms}", 200 * u64::from(k)));
    }
    let step = std::f64::consts::LN_2 / f64::from(k);
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for j in 1..=terms {
        // −ln(1 − 2^{−j/K}) with 1 − 2^{−x} computed as −expm1(−x ln 2)
        let term = -(-(-(j as f64) * step).exp_m1()).ln();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    let log2_product = sum / std::f64::consts::LN_2;
    let log2_bound = 5.0 * f64::from(k);
    Ok(PochhammerRecord {
        k,
        terms,
        log2_product,
        product: log2_product.exp2(),
        log2_bound,
        pass: log2_product <= log2_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert!((binary_entropy(0.25) - 0.811_278_124_459_132_8).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_extremes() {
        assert!(mixture_mutual_information(4096, 0.0).abs() < 1e-9);
        assert!((mixture_mutual_information(4096, 1.0) - 12.0).abs() < 1e-9);
    }

    #[test]
    fn mutual_information_against_direct_sum() {
        // I(X;Y) = Σ_{x,y} P(x,y) log₂ P(x,y) / (P(x)P(y)) over a small n
        let n = 16u64;
        let p = 0.3;
        let nf = n as f64;
        let mut direct = 0.0;
        for x in 0..n {
            for y in 0..n {
                let joint = (if x == y { p } else { 0.0 } + (1.0 - p) / nf) / nf;
                direct += joint * (joint / (1.0 / nf / nf)).log2();
            }
        }
        assert!((direct - mixture_mutual_information(n, p)).abs() < 1e-12);
    }

    #[test]
    fn adaptivity_limits() {
        let r = adaptivity_experiment(64, 0.0, 200_000, 1).unwrap();
        assert!((r.measured_p - 1.0 / 64.0).abs() < 0.002);
        let r = adaptivity_experiment(64, 6.0, 1000, 1).unwrap();
        assert_eq!(r.measured_p, 1.0);
        assert!(adaptivity_experiment(48, 1.0, 10, 0).is_err());
        assert!(adaptivity_experiment(64, 7.0, 10, 0).is_err());
    }

    #[test]
    fn pochhammer_k1() {
        let r = pochhammer_check(1, 200).unwrap();
        assert!((r.product - 3.462_746_619).abs() < 1e-6, "{}", r.product);
        assert!(r.pass);
        assert!(pochhammer_check(1, 199).is_err());
        assert!(pochhammer_check(0, 200).is_err());
    }

    #[test]
    fn pochhammer_k4_and_sweep() {
        let r = pochhammer_check(4, 800).unwrap();
        assert!(r.product <= 2f64.powi(20));
        for k in 1..=64 {
            assert!(pochhammer_check(k, 200 * u64::from(k)).unwrap().pass, "K={k}");
        }
    }
}
