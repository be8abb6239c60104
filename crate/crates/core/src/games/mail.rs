//! Insuring a k-of-n mail delivery: each mail is lost independently with
//! probability `p`, and the message gets through once `k` mails arrive.

use serde::{Deserialize, Serialize};

use super::{PrefixTable, TeamStrategy, VerifyReport, Walk};
use crate::channels::{build_channel, erasure_generator_cone, ChannelSpec, GameChannel};
use crate::cone::sequence_digits;
use crate::error::{input, Result};

/// Largest `n` for which the full strategy table is built.
pub const MAIL_CAP: usize = 20;

const DELIVERED: usize = 0;

fn check(n: usize, k: usize, p: f64) -> Result<()> {
    if k == 0 || k > n {
        return input("need 1 <= k <= n");
    }
    if !(p > 0.0 && p < 1.0) {
        return input("loss probability must lie in (0, 1)");
    }
    Ok(())
}

/// `P(t + Binomial(remaining, 1 - p) < k)`.
fn tail(remaining: usize, delivered: usize, k: usize, p: f64) -> f64 {
    if delivered >= k {
        return 0.0;
    }
    let need = k - delivered;
    if need > remaining {
        return 1.0;
    }
    let (lq, lp) = ((1.0 - p).ln(), p.ln());
    let mut log_choose = 0.0f64;
    let mut sum = 0.0;
    for j in 0..need {
        if j > 0 {
            log_choose += ((remaining - j + 1) as f64).ln() - (j as f64).ln();
        }
        sum += (log_choose + j as f64 * lq + (remaining - j) as f64 * lp).exp();
    }
    sum.min(1.0)
}

/// Probability that fewer than `k` of `n` mails arrive.
pub fn mail_constant_loss(n: usize, k: usize, p: f64) -> Result<f64> {
    check(n, k, p)?;
    Ok(tail(n, 0, k, p))
}

#[derive(Debug, Clone)]
pub struct MailInsurance {
    pub channel: GameChannel,
    pub strategy: TeamStrategy,
    pub constant_loss: f64,
    pub n: usize,
    pub k: usize,
}

/// Premiums are the changes of the failure probability after each mail.
pub fn mail_insurance(n: usize, k: usize, p: f64) -> Result<MailInsurance> {
    check(n, k, p)?;
    if n > MAIL_CAP {
        return Err(crate::error::Error::Resource(format!(
            "strategy tables are built for n <= {MAIL_CAP}; use mail_constant_loss for larger n"
        )));
    }
    let channel = build_channel(&ChannelSpec::Erasure { p })?;
    let mut policy = PrefixTable::filled(2, n, Vec::new())?;
    for i in 0..n {
        for idx in 0..policy.level(i).len() {
            let t = sequence_digits(idx, 2, i).iter().filter(|&&y| y == DELIVERED).count();
            let now = tail(n - i, t, k, p);
            *policy.at_mut(i, idx) = vec![tail(n - i - 1, t + 1, k, p) - now, tail(n - i - 1, t, k, p) - now];
        }
    }
    let strategy = TeamStrategy { codebook: vec![vec![0; n]], policy: vec![policy], decoder: vec![0; 1 << n] };
    Ok(MailInsurance { channel, strategy, constant_loss: tail(n, 0, k, p), n, k })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MailVerification {
    pub constant_loss: f64,
    /// Against the implied-probability halfspace.
    pub halfspace: VerifyReport,
    /// Against the cone generated by the insurance policy itself.
    pub generator: VerifyReport,
}

/// Walk all `2^n` delivery patterns, charging 1 whenever fewer than `k` arrive.
pub fn verify_mail(n: usize, k: usize, p: f64, tol: f64) -> Result<MailVerification> {
    let ins = mail_insurance(n, k, p)?;
    let failed = |_: usize, leaf: usize| {
        let delivered = sequence_digits(leaf, 2, n).iter().filter(|&&y| y == DELIVERED).count();
        if delivered < k { 1.0 } else { 0.0 }
    };
    let generator = erasure_generator_cone(p)?;
    let run = |cone| {
        Walk {
            cones: vec![cone],
            n,
            codebook: &ins.strategy.codebook,
            policy: &ins.strategy.policy,
            loss: &failed,
            eps: ins.constant_loss,
            prefix_rule: false,
            tol,
            node_cap: super::NODE_CAP,
        }
        .run()
    };
    Ok(MailVerification {
        constant_loss: ins.constant_loss,
        halfspace: run(ins.channel.cone(0))?,
        generator: run(&generator)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_mails_seven_needed() {
        let v = verify_mail(10, 7, 0.1, 1e-9).unwrap();
        assert!((v.constant_loss - 0.012_795_198_4).abs() < 1e-12, "{}", v.constant_loss);
        for r in [&v.halfspace, &v.generator] {
            assert!(r.is_win());
            assert_eq!(r.paths, 1024);
            assert!((r.min_payoff + v.constant_loss).abs() < 1e-12);
            assert!((r.max_payoff + v.constant_loss).abs() < 1e-12);
        }
    }

    #[test]
    fn all_mails_needed() {
        assert!((mail_constant_loss(3, 3, 0.5).unwrap() - 0.875).abs() < 1e-15);
        let v = verify_mail(3, 3, 0.5, 1e-9).unwrap();
        assert!(v.halfspace.is_win() && v.generator.is_win());
    }

    #[test]
    fn rate_below_capacity_drives_loss_down() {
        assert!(mail_constant_loss(200, 100, 0.3).unwrap() < 0.01);
        assert!(mail_constant_loss(200, 150, 0.3).unwrap() > 0.5);
        assert!(mail_insurance(21, 10, 0.3).is_err());
        assert!(mail_constant_loss(3, 4, 0.3).is_err());
    }
}
