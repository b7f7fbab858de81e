//! Rates and bounds: the achievable scheme rate, the MAN and CMACC
//! baseline rates at matched total memory, the cut-set lower bound, and
//! the index-coding lower bound on the transmission count (both its
//! closed form and the explicit generalized independent set behind it).

use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::combinatorics::{binom, k_subsets, IndexSet};
use crate::delivery::Term;
use crate::model::{all_users, user_rank, DemandVector, SystemParams, UserId};
use crate::placement::{
    access_memory_split, demanded_minis, private_memory_split, user_can_read, wanting_users,
    MiniSubfileId, Tag,
};
use crate::rational::{rat, ratio, Rat};
use crate::{Error, Result};

/// Achievable worst-case rate of the scheme at integer access replication
/// `t` and a single-replicated private cache:
/// `C(lam-r-t, r)/C(t+r, t) + sum_{i=1}^{r-1} C(r,i) C(lam-t-r, r-i) / (2 C(t+i, i))`.
pub fn thm2_rate(lambda: u8, r: u8, t: u8) -> Rat {
    let (lam, r, t) = (lambda as i64, r as i64, t as i64);
    let mut rate = ratio(binom(lam - r - t, r) as i128, binom(t + r, t) as i128);
    for i in 1..r {
        rate += ratio(
            (binom(r, i) * binom(lam - t - r, r - i)) as i128,
            2 * binom(t + i, i) as i128,
        );
    }
    rate
}

fn interpolate(t: Rat, rate_at: impl Fn(u64) -> Rat) -> Rat {
    if t.is_integer() {
        return rate_at(t.to_integer() as u64);
    }
    let lo = t.floor().to_integer() as u64;
    let alpha = t - t.floor();
    alpha * rate_at(lo + 1) + (rat(1) - alpha) * rate_at(lo)
}

/// MAN dedicated-cache rate `C(K, t+1)/C(K, t)` with `t = K M / N`,
/// linearly interpolated between integer points (the lower convex
/// envelope, achievable by memory sharing).
pub fn man_rate(k: u64, m: Rat, n: u32) -> Result<Rat> {
    if m < rat(0) || m > rat(n as i128) {
        return Err(Error::Parameter(format!("man_rate: memory {m} outside [0, {n}]")));
    }
    let t = rat(k as i128) * m / rat(n as i128);
    Ok(interpolate(t, |ti| {
        if ti >= k {
            rat(0)
        } else {
            ratio(binom(k as i64, ti as i64 + 1) as i128, binom(k as i64, ti as i64) as i128)
        }
    }))
}

/// CMACC multi-access rate `C(lam, t+r)/C(lam, t)` with `t = lam M / N`,
/// interpolated between integer points.
pub fn cmacc_rate(lambda: u8, r: u8, m: Rat, n: u32) -> Result<Rat> {
    if m < rat(0) || m > rat(n as i128) {
        return Err(Error::Parameter(format!("cmacc_rate: memory {m} outside [0, {n}]")));
    }
    let t = rat(lambda as i128) * m / rat(n as i128);
    let (lam, r) = (lambda as i64, r as i64);
    Ok(interpolate(t, |ti| {
        if ti >= lambda as u64 {
            rat(0)
        } else {
            ratio(binom(lam, ti as i64 + r) as i128, binom(lam, ti as i64) as i128)
        }
    }))
}

/// Sandwich on the optimal rate under uncoded placement: the MAN rate at
/// total per-user memory `r M_a + M_p` from below, the CMACC rate at
/// per-cache memory `M_a + M_p / r` from above.
///
/// Total memories past `N` clamp to `N`; the rates are zero there.
pub fn prop1_bounds(params: &SystemParams) -> Result<(Rat, Rat)> {
    let n = rat(params.n_files as i128);
    let m_dedicated = (rat(params.r as i128) * params.m_access + params.m_private).min(n);
    let m_cmacc = (params.m_access + params.m_private / rat(params.r as i128)).min(n);
    let lower = man_rate(params.k_users(), m_dedicated, params.n_files)?;
    let upper = cmacc_rate(params.lambda, params.r, m_cmacc, params.n_files)?;
    Ok((lower, upper))
}

/// Cut-set lower bound and the group size `s` attaining it:
/// `max_s s - (q M_a + s M_p) / floor(N/s)` with `q = min(s+r-1, lambda)`,
/// each term floored at zero.
pub fn cutset_bound_with_argmax(params: &SystemParams) -> (Rat, u64) {
    let k = params.k_users();
    let n = params.n_files as u64;
    let mut best = (rat(0), 1u64);
    for s in 1..=k.min(n) {
        let q = (s + params.r as u64 - 1).min(params.lambda as u64);
        let rounds = rat((n / s) as i128);
        let term = rat(s as i128)
            - (rat(q as i128) * params.m_access
                + rat(s as i128) * params.m_private)
                / rounds;
        let term = term.max(rat(0));
        if term > best.0 {
            best = (term, s);
        }
    }
    best
}

/// Cut-set lower bound on the worst-case rate under any placement.
pub fn cutset_bound(params: &SystemParams) -> Rat {
    cutset_bound_with_argmax(params).0
}

/// Coding gain: terms per transmission, `C(t+r, r)` for disjoint orbits
/// and `2 C(t+i, i)` when the user and tag overlap in `i` caches.
pub fn coding_gain(i: u8, t: u8, r: u8) -> u64 {
    if i == 0 {
        binom(t as i64 + r as i64, r as i64)
    } else {
        2 * binom(t as i64 + i as i64, i as i64)
    }
}

/// Closed-form lower bound on the number of transmissions of the scheme's
/// delivery problem, via a generalized independent set:
/// `C(lam-t, r) C(lam-r+1, t+1) - C(lam-r+2, t+2)` plus the triangular
/// count `(C(lam-t, r) - lam + r + t - 2)(C(lam-t, r) - lam + r + t - 1)/2`.
///
/// The triangular term is the series `sum_{m} (c - m)` over user indices
/// `m` from `lam - r - t + 2` up to `c = C(lam-t, r)`; it is evaluated
/// over the actual (possibly empty) index range, which agrees with the
/// product form everywhere the series is meaningful.
pub fn alpha_closed_form(lambda: u8, r: u8, t: u8) -> u64 {
    let (lam, r, t) = (lambda as i64, r as i64, t as i64);
    let c = binom(lam - t, r) as i128;
    let head = c * binom(lam - r + 1, t + 1) as i128 - binom(lam - r + 2, t + 2) as i128;
    debug_assert!(head >= 0, "negative set size; r = {r} outside [1, lambda]?");
    let head = head.max(0);
    let m_start = (lam - r - t + 2).max(1) as i128;
    let span = c - m_start;
    let tail = if span >= 0 { span * (span + 1) / 2 } else { 0 };
    (head + tail) as u64
}

/// The explicit generalized independent set `B1 ∪ B2` behind
/// [`alpha_closed_form`], together with the independence verdict.
#[derive(Clone, Debug)]
pub struct AlphaConstruction {
    pub b1: BTreeSet<Term>,
    pub b2: BTreeSet<Term>,
    /// True when the independence criterion held for every message.
    pub check: bool,
}

impl AlphaConstruction {
    pub fn total(&self) -> u64 {
        (self.b1.len() + self.b2.len()) as u64
    }
}

/// Builds the independent set for a worst-case (all-distinct) demand at
/// integer `t_a` and `t_p = 1`.
///
/// `B1` collects, for the i-th user in lexicographic order, the messages
/// of subfiles inside `[r+i, lambda]` tagged by later wanting users; `B2`
/// adds messages of the last subfile `[lambda-t+1, lambda]` among its
/// remaining wanting users. Checks that ordering every subset by the
/// demanding user's rank leaves its first message's receiver with no
/// other member as side information.
pub fn alpha_construct(params: &SystemParams, d: &DemandVector) -> Result<AlphaConstruction> {
    let t = params.integer_t_access().ok_or_else(|| {
        Error::Parameter(format!("t_access = {} is not an integer", params.t_access()))
    })?;
    if params.integer_t_private() != Some(1) {
        return Err(Error::Parameter(format!(
            "the independent-set construction needs t_private = 1, got {}",
            params.t_private()
        )));
    }
    if d.len() as u64 != params.k_users() || !d.is_all_distinct() {
        return Err(Error::Parameter(
            "the independent-set construction needs all-distinct demands".into(),
        ));
    }
    let lambda = params.lambda;
    let r = params.r;
    let users = all_users(lambda, r);
    let c = binom(lambda as i64 - t as i64, r as i64);

    let mut b1: BTreeSet<Term> = BTreeSet::new();
    let limit = lambda as i64 - r as i64 - t as i64 + 1;
    for i in 1..=limit.max(0) as u64 {
        let demander = &users[i as usize - 1];
        let ground = IndexSet::range(r + i as u8, lambda);
        for subfile in k_subsets(&ground, t as usize) {
            debug_assert!(subfile.is_disjoint(demander.caches()));
            let wanters = wanting_users(lambda, r, &subfile);
            for k in (i + 1)..=c {
                b1.insert(Term::new(
                    demander.clone(),
                    subfile.clone(),
                    Tag::single(wanters[k as usize - 1].clone()),
                ));
            }
        }
    }

    let mut b2: BTreeSet<Term> = BTreeSet::new();
    let s_prime = IndexSet::range(lambda - t + 1, lambda);
    let wanters = wanting_users(lambda, r, &s_prime);
    let m_start = (lambda as i64 - r as i64 - t as i64 + 2).max(1) as u64;
    for m in m_start..=c {
        for k in (m + 1)..=c {
            b2.insert(Term::new(
                wanters[m as usize - 1].clone(),
                s_prime.clone(),
                Tag::single(wanters[k as usize - 1].clone()),
            ));
        }
    }

    let all: Vec<&Term> = b1.iter().chain(b2.iter()).collect();
    let mut check = (b1.intersection(&b2).count()) == 0;
    if check {
        check = pairwise_independent(lambda, &all)?;
    }
    if check && all.len() <= 16 {
        let instance = IndexCodingInstance::from_delivery(params, d)?;
        let indices: Vec<usize> = all
            .iter()
            .map(|term| instance.message_index(&term.to_mini(d)?))
            .collect::<Result<_>>()?;
        check = instance.is_generalized_independent(&indices);
    }
    Ok(AlphaConstruction { b1, b2, check })
}

/// The ordering criterion: for any two messages, the one whose demanding
/// user ranks first must not hold the other in its caches.
fn pairwise_independent(lambda: u8, messages: &[&Term]) -> Result<bool> {
    let ranks: Vec<u64> = messages
        .iter()
        .map(|m| user_rank(&m.user, lambda))
        .collect::<Result<_>>()?;
    for (i, x) in messages.iter().enumerate() {
        for (j, y) in messages.iter().enumerate() {
            if i == j || ranks[i] > ranks[j] {
                continue;
            }
            let y_mini = MiniSubfileId {
                file: 0,
                subfile: y.subfile.clone(),
                tag: y.tag.clone(),
            };
            if user_can_read(&x.user, &y_mini) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One receiver of the delivery-phase index coding problem.
#[derive(Clone, Debug)]
pub struct Receiver {
    /// Index of the wanted message.
    pub wanted: usize,
    /// Indices of the messages the receiver already holds.
    pub side_info: BTreeSet<usize>,
}

/// The delivery phase as an index coding problem: one message per
/// demanded mini-subfile, one receiver per (user, wanted message) pair.
#[derive(Clone, Debug)]
pub struct IndexCodingInstance {
    pub messages: Vec<MiniSubfileId>,
    pub receivers: Vec<Receiver>,
}

impl IndexCodingInstance {
    /// Formulates the problem for a worst-case demand.
    pub fn from_delivery(params: &SystemParams, d: &DemandVector) -> Result<Self> {
        if !d.is_all_distinct() {
            return Err(Error::Parameter(
                "index coding formulation needs all-distinct demands".into(),
            ));
        }
        let users = all_users(params.lambda, params.r);
        let mut messages = Vec::new();
        let mut wanted_by: Vec<(UserId, usize)> = Vec::new();
        for user in &users {
            for mini in demanded_minis(params, user, d.file_of(user)?)? {
                wanted_by.push((user.clone(), messages.len()));
                messages.push(mini);
            }
        }
        let mut receivers = Vec::with_capacity(wanted_by.len());
        for (user, wanted) in wanted_by {
            let side_info: BTreeSet<usize> = messages
                .iter()
                .enumerate()
                .filter(|(_, m)| user_can_read(&user, m))
                .map(|(i, _)| i)
                .collect();
            debug_assert!(!side_info.contains(&wanted));
            receivers.push(Receiver { wanted, side_info });
        }
        Ok(IndexCodingInstance { messages, receivers })
    }

    pub fn message_index(&self, mini: &MiniSubfileId) -> Result<usize> {
        self.messages
            .iter()
            .position(|m| m == mini)
            .ok_or_else(|| Error::Parameter(format!("{mini} is not a demanded message")))
    }

    /// Exhaustive generalized-independence check: every nonempty subset
    /// must contain a message whose receiver holds none of the others.
    /// Exponential in `indices.len()`; callers keep it at 16 or fewer.
    pub fn is_generalized_independent(&self, indices: &[usize]) -> bool {
        assert!(indices.len() <= 24, "exhaustive check limited to small sets");
        for mask in 1u32..(1 << indices.len()) {
            let members: Vec<usize> = (0..indices.len())
                .filter(|b| mask >> b & 1 == 1)
                .map(|b| indices[b])
                .collect();
            let resolvable = members.iter().any(|&m| {
                self.receivers.iter().any(|rx| {
                    rx.wanted == m
                        && members.iter().all(|&other| other == m || !rx.side_info.contains(&other))
                })
            });
            if !resolvable {
                return false;
            }
        }
        true
    }
}

/// Achievable rate at one integer corner `(t_a, t_p)`, when a scheme
/// exists there: the CMACC rate at `t_p = 0`, the general scheme at
/// `t_p = 1`, zero once private caches hold every missing mini-subfile,
/// and the special four-cache point `(r=2, t_a=1, t_p=2)`.
fn rate_at_corner(lambda: u8, r: u8, t_a: u64, t_p: u64) -> Option<Rat> {
    if t_a > lambda as u64 {
        return None;
    }
    let c = binom(lambda as i64 - t_a as i64, r as i64);
    if t_p == 0 {
        return Some(ratio(
            binom(lambda as i64, t_a as i64 + r as i64) as i128,
            binom(lambda as i64, t_a as i64) as i128,
        ));
    }
    if t_p >= c {
        // the private budget covers every missing mini-subfile outright
        return Some(rat(0));
    }
    if t_p == 1 {
        return Some(thm2_rate(lambda, r, t_a as u8));
    }
    if lambda == 4 && r == 2 && t_a == 1 && t_p == 2 {
        return Some(ratio(1, 6));
    }
    None
}

/// Worst-case rate achieved by the scheme at these parameters, combining
/// the integer corners by memory sharing when a replication factor is
/// fractional. `None` when some needed corner has no scheme.
pub fn achievable_rate(params: &SystemParams) -> Result<Option<Rat>> {
    let access = access_memory_split(params)?;
    let private = private_memory_split(params)?;
    let mut corners: Vec<(Rat, u64, u64)> = Vec::new();
    let access_parts = [
        (access.alpha, access.t_hi),
        (rat(1) - access.alpha, access.t_lo),
    ];
    let private_parts = [
        (private.alpha, private.t_hi),
        (rat(1) - private.alpha, private.t_lo),
    ];
    for (wa, ta) in &access_parts {
        for (wp, tp) in &private_parts {
            let weight = *wa * *wp;
            if !weight.is_zero() {
                corners.push((weight, *ta, *tp));
            }
        }
    }
    let mut rate = rat(0);
    for (weight, ta, tp) in corners {
        match rate_at_corner(params.lambda, params.r, ta, tp) {
            Some(r) => rate += weight * r,
            None => return Ok(None),
        }
    }
    Ok(Some(rate))
}

/// Every bound and rate for one parameter point.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub params: SystemParams,
    pub t_access: Rat,
    pub t_private: Rat,
    pub k_users: u64,
    pub subpacketization: Option<u64>,
    /// Scheme rate; `None` when no scheme covers these parameters.
    pub rate_achievable: Option<Rat>,
    pub man_lb: Rat,
    pub cmacc_ub: Rat,
    pub cutset_lb: Rat,
    /// Transmission-count lower bound over subpacketization; only defined
    /// for the single-replicated private placement at integer `t_a`.
    pub alpha_lb_normalized: Option<Rat>,
}

impl fmt::Display for BoundsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "lambda={} r={} n_files={} m_access={} m_private={}",
            self.params.lambda,
            self.params.r,
            self.params.n_files,
            self.params.m_access,
            self.params.m_private
        )?;
        write!(
            f,
            "t_access={} t_private={} k_users={}",
            self.t_access, self.t_private, self.k_users
        )?;
        match self.subpacketization {
            Some(fp) => writeln!(f, " subpacketization={fp}")?,
            None => writeln!(f, " subpacketization=n/a")?,
        }
        match &self.rate_achievable {
            Some(r) => writeln!(f, "rate_achievable={r}")?,
            None => writeln!(f, "rate_achievable=n/a")?,
        }
        writeln!(f, "man_lb={}", self.man_lb)?;
        writeln!(f, "cmacc_ub={}", self.cmacc_ub)?;
        writeln!(f, "cutset_lb={}", self.cutset_lb)?;
        match &self.alpha_lb_normalized {
            Some(a) => writeln!(f, "alpha_lb_normalized={a}"),
            None => writeln!(f, "alpha_lb_normalized=n/a"),
        }
    }
}

/// Computes the full [`BoundsReport`] for one parameter point.
pub fn bounds_report(params: &SystemParams) -> Result<BoundsReport> {
    let (man_lb, cmacc_ub) = prop1_bounds(params)?;
    let cutset_lb = cutset_bound(params);
    let rate_achievable = achievable_rate(params)?;
    let alpha_lb_normalized = match (params.integer_t_access(), params.integer_t_private()) {
        (Some(t_a), Some(1)) => {
            let alpha = alpha_closed_form(params.lambda, params.r, t_a);
            let fp = params.subpacketization().unwrap_or(0);
            if fp > 0 {
                Some(ratio(alpha as i128, fp as i128))
            } else {
                debug_assert_eq!(alpha, 0);
                Some(rat(0))
            }
        }
        _ => None,
    };
    Ok(BoundsReport {
        params: params.clone(),
        t_access: params.t_access(),
        t_private: params.t_private(),
        k_users: params.k_users(),
        subpacketization: params.subpacketization(),
        rate_achievable,
        man_lb,
        cmacc_ub,
        cutset_lb,
        alpha_lb_normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::delivery::build_transmissions;
    use crate::model::worst_case_demand;

    fn params(lambda: u8, r: u8, n: u32, t_a_num: i128, t_a_den: i128, t_p: u64) -> SystemParams {
        let k = binom(lambda as i64, r as i64) as i128;
        SystemParams::new(
            lambda,
            r,
            n,
            ratio(t_a_num * n as i128, t_a_den * lambda as i128),
            ratio(t_p as i128 * n as i128, k),
        )
    }

    fn example1() -> SystemParams {
        params(4, 2, 6, 1, 1, 1)
    }

    #[test]
    fn thm2_rate_examples() {
        assert_eq!(thm2_rate(4, 2, 1), ratio(1, 2));
        assert_eq!(thm2_rate(5, 2, 1), ratio(4, 3));
        // at t = lambda - r the leading term vanishes with the rest
        for (lambda, r) in [(4u8, 2u8), (6, 2), (6, 3), (7, 3)] {
            assert_eq!(thm2_rate(lambda, r, lambda - r), rat(0));
        }
    }

    #[test]
    fn man_rate_examples() {
        assert_eq!(man_rate(6, rat(4), 6).unwrap(), ratio(2, 5));
        assert_eq!(man_rate(6, rat(6), 6).unwrap(), rat(0));
        assert_eq!(man_rate(6, rat(0), 6).unwrap(), rat(6));
        assert!(man_rate(6, rat(7), 6).is_err());
        assert!(man_rate(6, rat(-1), 6).is_err());
        // fractional memory interpolates linearly between integer points
        let mid = man_rate(6, ratio(1, 2), 6).unwrap();
        let r0 = man_rate(6, rat(0), 6).unwrap();
        let r1 = man_rate(6, rat(1), 6).unwrap();
        assert_eq!(mid, (r0 + r1) / rat(2));
    }

    #[test]
    fn cmacc_rate_examples() {
        // t = 1 at lambda=4, r=2
        assert_eq!(cmacc_rate(4, 2, ratio(6, 4), 6).unwrap(), rat(1));
        // t = lambda - r leaves a single transmission
        assert_eq!(cmacc_rate(4, 2, rat(3), 6).unwrap(), ratio(1, 6));
        assert_eq!(cmacc_rate(4, 2, rat(6), 6).unwrap(), rat(0));
    }

    #[test]
    fn prop1_examples() {
        let (lower, upper) = prop1_bounds(&example1()).unwrap();
        assert_eq!(lower, ratio(2, 5));
        assert_eq!(upper, ratio(13, 18));
        assert!(lower <= ratio(1, 2) && ratio(1, 2) <= upper);

        // with no private memory the upper bound meets the scheme exactly
        let p = params(4, 2, 6, 1, 1, 0);
        let (_, upper) = prop1_bounds(&p).unwrap();
        assert_eq!(upper, achievable_rate(&p).unwrap().unwrap());
        assert_eq!(upper, rat(1));

        // degenerate single-cache access equals the dedicated network
        let p = SystemParams::new(4, 1, 8, rat(0), rat(2));
        let (lower, upper) = prop1_bounds(&p).unwrap();
        assert_eq!(lower, upper);
        assert_eq!(lower, man_rate(4, rat(2), 8).unwrap());
    }

    #[test]
    fn cutset_examples() {
        // the four-cache doubly-replicated private point peaks at s = 1
        let p = params(4, 2, 6, 1, 1, 2);
        let (value, s) = cutset_bound_with_argmax(&p);
        assert_eq!(value, ratio(1, 6));
        assert_eq!(s, 1);
        // s = 1 term is 1 - (r M_a + M_p)/N
        let s1 = rat(1) - (rat(2) * p.m_access + p.m_private) / rat(6);
        assert_eq!(value, s1);

        let empty = SystemParams::new(4, 2, 6, rat(0), rat(0));
        assert_eq!(cutset_bound(&empty), rat(6));

        assert_eq!(cutset_bound(&example1()), ratio(1, 3));
    }

    #[test]
    fn alpha_closed_form_examples() {
        assert_eq!(alpha_closed_form(4, 2, 1), 5);
        assert_eq!(alpha_closed_form(5, 2, 1), 29);
        // consistency with the schedule length at (5,2,1)
        assert!(alpha_closed_form(5, 2, 1) <= 40);
        // degenerate tail: no inverted arithmetic series may leak in
        assert_eq!(alpha_closed_form(6, 3, 6), 0);
        assert_eq!(alpha_closed_form(7, 3, 7), 0);
    }

    #[test]
    fn alpha_construct_small_cases() {
        let p = example1();
        let d = worst_case_demand(&p).unwrap();
        let a = alpha_construct(&p, &d).unwrap();
        assert_eq!(a.total(), 5);
        assert!(a.check);
        assert_eq!(a.total(), alpha_closed_form(4, 2, 1));

        let p = params(5, 2, 10, 1, 1, 1);
        let d = worst_case_demand(&p).unwrap();
        let a = alpha_construct(&p, &d).unwrap();
        assert_eq!(a.b1.len(), 26);
        assert_eq!(a.b2.len(), 3);
        assert!(a.b1.intersection(&a.b2).next().is_none());
        assert!(a.check);
    }

    #[test]
    fn alpha_construct_matches_closed_form_and_schedule() {
        for (lambda, r) in [(4u8, 2u8), (5, 2), (6, 2), (6, 3)] {
            for t_a in 0..=lambda {
                let n = binom(lambda as i64, r as i64) as u32;
                let p = params(lambda, r, n, t_a as i128, 1, 1);
                let d = worst_case_demand(&p).unwrap();
                let a = alpha_construct(&p, &d).unwrap();
                assert_eq!(
                    a.total(),
                    alpha_closed_form(lambda, r, t_a),
                    "lambda={lambda} r={r} t={t_a}"
                );
                assert!(a.check, "lambda={lambda} r={r} t={t_a}");
                let schedule = build_transmissions(&p, &d).unwrap();
                assert!(a.total() <= schedule.len() as u64);
            }
        }
    }

    #[test]
    fn alpha_construct_rejects_repeated_demands() {
        let p = example1();
        let users: Vec<UserId> = all_users(4, 2);
        let d = DemandVector::new(users.into_iter().map(|u| (u, 1)).collect());
        assert!(alpha_construct(&p, &d).is_err());
    }

    #[test]
    fn index_coding_instance_shape() {
        let p = example1();
        let d = worst_case_demand(&p).unwrap();
        let instance = IndexCodingInstance::from_delivery(&p, &d).unwrap();
        // six users, four missing minis each
        assert_eq!(instance.messages.len(), 24);
        assert_eq!(instance.receivers.len(), 24);
        for rx in &instance.receivers {
            assert!(!rx.side_info.contains(&rx.wanted));
        }
        // a flip pair sits in each other's side information, so it can
        // never be generalized independent
        let user = |a: u8, b: u8| UserId::new(IndexSet::new([a, b]));
        let m1 = instance
            .message_index(&MiniSubfileId {
                file: 1,
                subfile: IndexSet::singleton(3),
                tag: Tag::single(user(1, 4)),
            })
            .unwrap();
        let m2 = instance
            .message_index(&MiniSubfileId {
                file: 3,
                subfile: IndexSet::singleton(3),
                tag: Tag::single(user(1, 2)),
            })
            .unwrap();
        assert!(!instance.is_generalized_independent(&[m1, m2]));
        assert!(instance.is_generalized_independent(&[m1]));
    }

    #[test]
    fn coding_gain_values() {
        assert_eq!(coding_gain(0, 1, 2), 3);
        assert_eq!(coding_gain(1, 1, 2), 4);
        for i in 0..=2u8 {
            for t in 0..7u8 {
                assert!(coding_gain(i, t, 2) <= coding_gain(i, t + 1, 2));
            }
        }
    }

    #[test]
    fn schedule_length_matches_thm2_rate() {
        for (lambda, r) in [(4u8, 2u8), (5, 2), (6, 3)] {
            for t_a in 0..=lambda {
                let n = binom(lambda as i64, r as i64) as u32;
                let p = SystemParams::new(
                    lambda,
                    r,
                    n,
                    ratio(t_a as i128 * n as i128, lambda as i128),
                    ratio(n as i128, binom(lambda as i64, r as i64) as i128),
                );
                let d = worst_case_demand(&p).unwrap();
                let schedule = build_transmissions(&p, &d).unwrap();
                let fp = p.subpacketization().unwrap();
                assert_eq!(
                    rat(schedule.len() as i128),
                    thm2_rate(lambda, r, t_a) * rat(fp as i128),
                    "lambda={lambda} r={r} t={t_a}"
                );
            }
        }
    }

    #[test]
    fn memory_sharing_rate_is_the_exact_convex_combination() {
        // fractional t_a: rate = alpha R(ceil t) + (1 - alpha) R(floor t)
        let p = SystemParams::new(4, 2, 6, ratio(9, 4), rat(1));
        let split = access_memory_split(&p).unwrap();
        assert_eq!(split.alpha, ratio(1, 2));
        let expect = split.alpha * thm2_rate(4, 2, 2)
            + (rat(1) - split.alpha) * thm2_rate(4, 2, 1);
        assert_eq!(achievable_rate(&p).unwrap().unwrap(), expect);

        // fractional t_p between 0 and 1 mixes the CMACC and scheme corners
        let p = SystemParams::new(4, 2, 6, ratio(3, 2), ratio(1, 2));
        let expect = ratio(1, 2) * thm2_rate(4, 2, 1) + ratio(1, 2) * rat(1);
        assert_eq!(achievable_rate(&p).unwrap().unwrap(), expect);

        // unsupported corner: t_p between 2 and 3 away from the special point
        let p = SystemParams::new(5, 2, 10, rat(2), ratio(5, 2));
        assert_eq!(achievable_rate(&p).unwrap(), None);
    }

    #[test]
    fn bounds_report_example1() {
        let report = bounds_report(&example1()).unwrap();
        assert_eq!(report.rate_achievable, Some(ratio(1, 2)));
        assert_eq!(report.man_lb, ratio(2, 5));
        assert_eq!(report.cmacc_ub, ratio(13, 18));
        assert_eq!(report.cutset_lb, ratio(1, 3));
        assert_eq!(report.alpha_lb_normalized, Some(ratio(5, 12)));
        assert_eq!(report.subpacketization, Some(12));
        let text = report.to_string();
        assert!(text.contains("rate_achievable=1/2"));
        assert!(text.contains("alpha_lb_normalized=5/12"));
    }

    #[test]
    fn bounds_report_tp2_point() {
        let p = params(4, 2, 6, 1, 1, 2);
        let report = bounds_report(&p).unwrap();
        assert_eq!(report.rate_achievable, Some(ratio(1, 6)));
        assert_eq!(report.cutset_lb, ratio(1, 6));
        assert_eq!(report.alpha_lb_normalized, None);
    }
}
