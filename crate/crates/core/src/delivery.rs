//! Delivery-phase schedule generation.
//!
//! The server covers every demanded mini-subfile with XOR transmissions.
//! A demanded term `W_{d_U, S, U'}` generates an orbit of companion terms
//! through three rewrites:
//!
//! * [`flip`] exchanges the demanding user and the tag user,
//! * [`swap_o`] swaps subsets of `I = U ∩ U'` against the subfile index,
//! * [`swap_no`] swaps subsets of `U` against the subfile index when
//!   `I` is empty.
//!
//! [`build_transmissions`] drains the per-user demand sets orbit by orbit.
//! The resulting orbits partition the demanded mini-subfiles; a collision
//! aborts the run rather than emitting an overlapping schedule. The module
//! also provides the two baseline schedules the rates are compared against
//! and the hand-sized two-transmission schedule for the four-cache,
//! doubly-replicated private point.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::combinatorics::{binom, k_subsets, IndexSet};
use crate::model::{all_users, DemandVector, SystemParams, UserId};
use crate::placement::{demanded_minis, subfile_tags, subfile_universe, user_can_read, MiniSubfileId, Tag};
use crate::{Error, Result};

/// One XOR term: user `user` demands the mini-subfile of its requested
/// file lying in `subfile` with tag `tag`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    pub user: UserId,
    pub subfile: IndexSet,
    pub tag: Tag,
}

impl Term {
    pub fn new(user: UserId, subfile: IndexSet, tag: Tag) -> Self {
        Term { user, subfile, tag }
    }

    /// The concrete mini-subfile this term stands for under demand `d`.
    pub fn to_mini(&self, d: &DemandVector) -> Result<MiniSubfileId> {
        Ok(MiniSubfileId {
            file: d.file_of(&self.user)?,
            subfile: self.subfile.clone(),
            tag: self.tag.clone(),
        })
    }
}

impl fmt::Display for Term {
    /// Compact token form `d(12)|3|14`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d({})|{}|{}", self.user, self.subfile, self.tag)
    }
}

/// An unordered XOR of distinct demanded terms, kept in canonical
/// (sorted) order so schedules compare and print deterministically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transmission(Vec<Term>);

impl Transmission {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        let mut v: Vec<Term> = terms.into_iter().collect();
        v.sort();
        let before = v.len();
        v.dedup();
        if v.len() != before {
            return Err(Error::Invariant("transmission with repeated terms".into()));
        }
        if v.is_empty() {
            return Err(Error::Invariant("empty transmission".into()));
        }
        Ok(Transmission(v))
    }

    pub fn terms(&self) -> &[Term] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Transmission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

/// Schedule dump: one transmission per line.
pub fn schedule_lines(schedule: &[Transmission]) -> String {
    schedule.iter().map(|t| t.to_string()).collect::<Vec<_>>().join("\n")
}

fn single_tag_user(term: &Term) -> Result<&UserId> {
    term.tag.single_member()
}

/// `flip(W_{d_U,S,U'}) = W_{d_U,S,U'} xor W_{d_U',S,U}`.
pub fn flip(term: &Term) -> Result<[Term; 2]> {
    let tag_user = single_tag_user(term)?.clone();
    if tag_user == term.user {
        return Err(Error::Parameter(format!("flip: tag equals demanding user in {term}")));
    }
    let flipped = Term::new(tag_user, term.subfile.clone(), Tag::single(term.user.clone()));
    Ok([term.clone(), flipped])
}

/// Overlap swap: for every i-subset of `I = U ∩ U'` and every i-subset of
/// `S`, exchange them across user, subfile, and tag.
pub fn swap_o(term: &Term, i: usize) -> Result<Vec<Term>> {
    let tag_user = single_tag_user(term)?;
    let overlap = term.user.caches().intersection(tag_user.caches());
    if overlap.is_empty() {
        return Err(Error::Parameter(format!("swap_o: no overlap in {term}")));
    }
    if i == 0 {
        return Err(Error::Parameter("swap_o: swap size must be at least 1".into()));
    }
    let mut out = Vec::new();
    for u_sub in k_subsets(&overlap, i) {
        for s_sub in k_subsets(&term.subfile, i) {
            let user = term.user.caches().union(&s_sub).difference(&u_sub);
            let subfile = term.subfile.union(&u_sub).difference(&s_sub);
            let tag = tag_user.caches().union(&s_sub).difference(&u_sub);
            out.push(Term::new(
                UserId::new(user),
                subfile,
                Tag::single(UserId::new(tag)),
            ));
        }
    }
    Ok(out)
}

/// Disjoint swap: for every i-subset of `U` and every i-subset of `S`,
/// exchange them; the tag stays fixed.
pub fn swap_no(term: &Term, i: usize) -> Result<Vec<Term>> {
    if let Ok(tag_user) = single_tag_user(term) {
        if !term.user.caches().is_disjoint(tag_user.caches()) {
            return Err(Error::Parameter(format!("swap_no: user and tag overlap in {term}")));
        }
    }
    if i == 0 {
        return Err(Error::Parameter("swap_no: swap size must be at least 1".into()));
    }
    let mut out = Vec::new();
    for u_sub in k_subsets(term.user.caches(), i) {
        for s_sub in k_subsets(&term.subfile, i) {
            let user = term.user.caches().union(&s_sub).difference(&u_sub);
            let subfile = term.subfile.union(&u_sub).difference(&s_sub);
            out.push(Term::new(UserId::new(user), subfile, term.tag.clone()));
        }
    }
    Ok(out)
}

/// The demand set of one user: every `(subfile, tag)` it cannot read.
///
/// For a single-replicated private cache these are the pairs `(S, U')`
/// with `S` disjoint from the user, `U' != U`, and `S ∩ U' = ∅`; with no
/// private memory the tag is empty.
pub fn user_demand_set(params: &SystemParams, user: &UserId) -> Result<BTreeSet<(IndexSet, Tag)>> {
    let t_a = params.integer_t_access().ok_or_else(|| {
        Error::Parameter(format!("t_access = {} is not an integer", params.t_access()))
    })?;
    let t_p = params.integer_t_private().ok_or_else(|| {
        Error::Parameter(format!("t_private = {} is not an integer", params.t_private()))
    })?;
    let mut out = BTreeSet::new();
    for subfile in subfile_universe(params.lambda, t_a) {
        if !subfile.is_disjoint(user.caches()) {
            continue;
        }
        for tag in subfile_tags(params.lambda, params.r, t_p, &subfile) {
            if !tag.contains(user) {
                out.insert((subfile.clone(), tag));
            }
        }
    }
    Ok(out)
}

/// The full orbit generated from one demanded term: the transmission that
/// covers it. `t_access` is the access replication factor.
pub fn orbit(t_access: u8, r: u8, term: &Term) -> Result<Vec<Term>> {
    let t = t_access as usize;
    let overlap = match term.tag.single_member() {
        Ok(tag_user) => term.user.caches().intersection(tag_user.caches()),
        Err(_) if term.tag.is_empty() => IndexSet::empty(),
        Err(e) => return Err(e),
    };
    let mut terms = Vec::new();
    if !overlap.is_empty() {
        let mut inner = vec![term.clone()];
        for i in 1..=overlap.len().min(t) {
            inner.extend(swap_o(term, i)?);
        }
        for item in inner {
            terms.extend(flip(&item)?);
        }
    } else {
        terms.push(term.clone());
        for i in 1..=(r as usize).min(t) {
            terms.extend(swap_no(term, i)?);
        }
    }
    let unique: BTreeSet<&Term> = terms.iter().collect();
    if unique.len() != terms.len() {
        return Err(Error::Invariant(format!("orbit of {term} produced repeated terms")));
    }
    terms.sort();
    Ok(terms)
}

/// Which end of the demand sets the scheduler drains first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SelectionOrder {
    Lexicographic,
    ReverseLexicographic,
}

/// The delivery schedule for integer `t_a` and `t_p <= 1`, draining the
/// demand sets in lexicographic order.
pub fn build_transmissions(params: &SystemParams, d: &DemandVector) -> Result<Vec<Transmission>> {
    build_transmissions_with_order(params, d, SelectionOrder::Lexicographic)
}

/// [`build_transmissions`] with an explicit draining order; the schedule
/// may differ but its transmission count must not.
pub fn build_transmissions_with_order(
    params: &SystemParams,
    d: &DemandVector,
    order: SelectionOrder,
) -> Result<Vec<Transmission>> {
    let t_p = params.integer_t_private().ok_or_else(|| {
        Error::Parameter(format!("t_private = {} is not an integer", params.t_private()))
    })?;
    let t_a = params.integer_t_access().ok_or_else(|| {
        Error::Parameter(format!("t_access = {} is not an integer", params.t_access()))
    })?;
    let c = binom(params.lambda as i64 - t_a as i64, params.r as i64);
    if t_p > 1 && t_p < c {
        return Err(Error::Unsupported(format!(
            "schedule generation covers t_private <= 1, got {t_p}"
        )));
    }
    if t_p >= c {
        // every demand set is empty: users read everything already
        return Ok(Vec::new());
    }

    let mut users = all_users(params.lambda, params.r);
    if order == SelectionOrder::ReverseLexicographic {
        users.reverse();
    }
    for user in &users {
        d.file_of(user)?;
    }
    let mut demand_sets: BTreeMap<UserId, BTreeSet<(IndexSet, Tag)>> = users
        .iter()
        .map(|u| Ok((u.clone(), user_demand_set(params, u)?)))
        .collect::<Result<_>>()?;

    let mut schedule = Vec::new();
    for user in &users {
        loop {
            let entry = {
                let set = &demand_sets[user];
                let picked = match order {
                    SelectionOrder::Lexicographic => set.iter().next(),
                    SelectionOrder::ReverseLexicographic => set.iter().next_back(),
                };
                match picked {
                    Some(e) => e.clone(),
                    None => break,
                }
            };
            let generator = Term::new(user.clone(), entry.0, entry.1);
            let terms = orbit(t_a, params.r, &generator)?;
            for term in &terms {
                let owner = demand_sets.get_mut(&term.user).ok_or_else(|| {
                    Error::Invariant(format!("orbit term {term} names an unknown user"))
                })?;
                if !owner.remove(&(term.subfile.clone(), term.tag.clone())) {
                    return Err(Error::Invariant(format!(
                        "orbit of {generator} reached already-served term {term}; \
                         orbits no longer partition the demands"
                    )));
                }
            }
            schedule.push(Transmission::new(terms)?);
        }
    }
    Ok(schedule)
}

/// Baseline multi-access schedule: one transmission per `(t+r)`-subset `S`
/// of caches, XORing `W_{d_U, S \ U}` over the r-subsets `U` of `S`.
pub fn cmacc_delivery(
    lambda: u8,
    r: u8,
    t: u8,
    d: &DemandVector,
) -> Result<Vec<Transmission>> {
    let mut schedule = Vec::new();
    for ground in k_subsets(&IndexSet::universe(lambda), (t + r) as usize) {
        let mut terms = Vec::new();
        for user in k_subsets(&ground, r as usize) {
            let subfile = ground.difference(&user);
            let user = UserId::new(user);
            d.file_of(&user)?;
            terms.push(Term::new(user, subfile, Tag::empty()));
        }
        schedule.push(Transmission::new(terms)?);
    }
    Ok(schedule)
}

/// Baseline dedicated-cache schedule over `k` single-cache users: one
/// transmission per `(t+1)`-subset of users.
pub fn man_delivery(k: u8, t: u8, d: &DemandVector) -> Result<Vec<Transmission>> {
    if t as usize > k as usize {
        return Err(Error::Parameter(format!("man_delivery: t = {t} exceeds k = {k}")));
    }
    let mut schedule = Vec::new();
    for group in k_subsets(&IndexSet::universe(k), t as usize + 1) {
        let mut terms = Vec::new();
        for member in group.iter() {
            let user = UserId::new(IndexSet::singleton(member));
            d.file_of(&user)?;
            let subfile = group.difference(&IndexSet::singleton(member));
            terms.push(Term::new(user, subfile, Tag::empty()));
        }
        schedule.push(Transmission::new(terms)?);
    }
    Ok(schedule)
}

/// The two-transmission schedule for `lambda = 4, r = 2, t_a = 1, t_p = 2`.
///
/// Each user misses exactly two mini-subfiles. The transmissions pair one
/// missing mini-subfile per user into six-term XORs; the first grouping
/// (by per-user lexicographic order) that every user can peel is returned.
pub fn lambda4_tp2_delivery(
    params: &SystemParams,
    d: &DemandVector,
) -> Result<Vec<Transmission>> {
    if params.lambda != 4
        || params.r != 2
        || params.integer_t_access() != Some(1)
        || params.integer_t_private() != Some(2)
    {
        return Err(Error::Parameter(
            "special-case schedule needs lambda=4, r=2, t_a=1, t_p=2".into(),
        ));
    }
    let users = all_users(4, 2);
    let mut missing: Vec<Vec<Term>> = Vec::new();
    for user in &users {
        let minis = demanded_minis(params, user, d.file_of(user)?)?;
        let terms: Vec<Term> = minis
            .into_iter()
            .map(|m| Term::new(user.clone(), m.subfile, m.tag))
            .collect();
        if terms.len() != 2 {
            return Err(Error::Invariant(format!(
                "user {user} misses {} mini-subfiles, expected 2",
                terms.len()
            )));
        }
        missing.push(terms);
    }

    let decodable = |tx: &Transmission| -> bool {
        tx.terms().iter().all(|target| {
            tx.terms()
                .iter()
                .filter(|other| *other != target)
                .all(|other| {
                    let mini = MiniSubfileId {
                        file: 0,
                        subfile: other.subfile.clone(),
                        tag: other.tag.clone(),
                    };
                    user_can_read(&target.user, &mini)
                })
        })
    };

    for mask in 0u32..(1 << users.len()) {
        let mut first = Vec::new();
        let mut second = Vec::new();
        for (i, pair) in missing.iter().enumerate() {
            let pick = (mask >> i & 1) as usize;
            first.push(pair[pick].clone());
            second.push(pair[1 - pick].clone());
        }
        let first = Transmission::new(first)?;
        let second = Transmission::new(second)?;
        if decodable(&first) && decodable(&second) {
            return Ok(vec![first, second]);
        }
    }
    Err(Error::Invariant(
        "no decodable pairing of the twelve missing mini-subfiles exists".into(),
    ))
}

/// The schedule for any supported parameter point: the general scheduler
/// for `t_p <= 1` (or fully covered users), the special case at
/// `(4, 2, t_a=1, t_p=2)`.
pub fn schedule_for(params: &SystemParams, d: &DemandVector) -> Result<Vec<Transmission>> {
    let t_p = params.integer_t_private().ok_or_else(|| {
        Error::Parameter(format!("t_private = {} is not an integer", params.t_private()))
    })?;
    let t_a = params.integer_t_access().ok_or_else(|| {
        Error::Parameter(format!("t_access = {} is not an integer", params.t_access()))
    })?;
    let c = binom(params.lambda as i64 - t_a as i64, params.r as i64);
    if t_p <= 1 || t_p >= c {
        build_transmissions(params, d)
    } else if params.lambda == 4 && params.r == 2 && t_a == 1 && t_p == 2 {
        lambda4_tp2_delivery(params, d)
    } else {
        Err(Error::Unsupported(format!(
            "no delivery scheme for lambda={}, r={}, t_a={t_a}, t_p={t_p}",
            params.lambda, params.r
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::worst_case_demand;
    use crate::rational::ratio;

    fn set(elems: &[u8]) -> IndexSet {
        IndexSet::new(elems.iter().copied())
    }

    fn user(elems: &[u8]) -> UserId {
        UserId::new(set(elems))
    }

    fn term(u: &[u8], s: &[u8], t: &[u8]) -> Term {
        Term::new(user(u), set(s), Tag::single(user(t)))
    }

    fn params(lambda: u8, r: u8, n: u32, t_a: u8, t_p: u64) -> SystemParams {
        let k = binom(lambda as i64, r as i64) as i128;
        SystemParams::new(
            lambda,
            r,
            n,
            ratio(t_a as i128 * n as i128, lambda as i128),
            ratio(t_p as i128 * n as i128, k),
        )
    }

    #[test]
    fn flip_examples() {
        let t = term(&[1, 2], &[3], &[1, 4]);
        let [a, b] = flip(&t).unwrap();
        assert_eq!(a, t);
        assert_eq!(b, term(&[1, 4], &[3], &[1, 2]));

        let t = term(&[2, 3], &[1], &[3, 4]);
        let [_, b] = flip(&t).unwrap();
        assert_eq!(b, term(&[3, 4], &[1], &[2, 3]));

        // flip is an involution on the pair
        let [_, flipped] = flip(&t).unwrap();
        let [back, _] = flip(&flipped).unwrap();
        assert_eq!(flip(&back).unwrap()[1], t.clone());

        assert!(flip(&term(&[1, 2], &[3], &[1, 2])).is_err());
    }

    #[test]
    fn swap_o_examples() {
        // swaps every 1-subset of the overlap against the subfile index
        let t = term(&[1, 2, 3], &[4, 5], &[1, 2, 6]);
        let got = swap_o(&t, 1).unwrap();
        let expect = [term(&[2, 3, 4], &[1, 5], &[2, 4, 6]),
            term(&[2, 3, 5], &[1, 4], &[2, 5, 6]),
            term(&[1, 3, 4], &[2, 5], &[1, 4, 6]),
            term(&[1, 3, 5], &[2, 4], &[1, 5, 6])];
        assert_eq!(
            got.iter().collect::<BTreeSet<_>>(),
            expect.iter().collect::<BTreeSet<_>>()
        );
        assert_eq!(got.len() as u64, binom(2, 1) * binom(2, 1));

        let t = term(&[1, 2], &[3], &[1, 4]);
        assert_eq!(swap_o(&t, 1).unwrap(), vec![term(&[2, 3], &[1], &[3, 4])]);

        for out in swap_o(&term(&[1, 2, 3], &[4, 5], &[1, 2, 6]), 2).unwrap() {
            assert!(out.subfile.is_disjoint(out.user.caches()));
        }
        assert!(swap_o(&term(&[1, 2], &[3], &[4, 5]), 1).is_err());
    }

    #[test]
    fn swap_no_examples() {
        let t = term(&[1, 2, 3], &[4, 5], &[6, 7, 8]);
        let got = swap_no(&t, 2).unwrap();
        let expect = [term(&[3, 4, 5], &[1, 2], &[6, 7, 8]),
            term(&[2, 4, 5], &[1, 3], &[6, 7, 8]),
            term(&[1, 4, 5], &[2, 3], &[6, 7, 8])];
        assert_eq!(
            got.iter().collect::<BTreeSet<_>>(),
            expect.iter().collect::<BTreeSet<_>>()
        );

        let t = term(&[1, 2], &[3], &[4, 5]);
        let got = swap_no(&t, 1).unwrap();
        assert_eq!(
            got.iter().collect::<BTreeSet<_>>(),
            [term(&[1, 3], &[2], &[4, 5]), term(&[2, 3], &[1], &[4, 5])]
                .iter()
                .collect::<BTreeSet<_>>()
        );
        assert!(got.iter().all(|o| o.tag == t.tag));

        assert!(swap_no(&term(&[1, 2], &[3], &[1, 4]), 1).is_err());
    }

    #[test]
    fn example1_user_demand_sets() {
        let p = params(4, 2, 6, 1, 1);
        let d12 = user_demand_set(&p, &user(&[1, 2])).unwrap();
        let expect: BTreeSet<(IndexSet, Tag)> = [
            (set(&[3]), Tag::single(user(&[1, 4]))),
            (set(&[3]), Tag::single(user(&[2, 4]))),
            (set(&[4]), Tag::single(user(&[1, 3]))),
            (set(&[4]), Tag::single(user(&[2, 3]))),
        ]
        .into_iter()
        .collect();
        assert_eq!(d12, expect);

        let d34 = user_demand_set(&p, &user(&[3, 4])).unwrap();
        let expect: BTreeSet<(IndexSet, Tag)> = [
            (set(&[1]), Tag::single(user(&[2, 3]))),
            (set(&[1]), Tag::single(user(&[2, 4]))),
            (set(&[2]), Tag::single(user(&[1, 3]))),
            (set(&[2]), Tag::single(user(&[1, 4]))),
        ]
        .into_iter()
        .collect();
        assert_eq!(d34, expect);

        // |D_U| = C(lambda-r, t) * (C(lambda-t, r) - 1)
        let p = params(5, 2, 10, 1, 1);
        let d = user_demand_set(&p, &user(&[1, 2])).unwrap();
        assert_eq!(d.len() as u64, binom(3, 1) * (binom(4, 2) - 1));
        assert_eq!(d.len(), 15);
    }

    fn tx(terms: &[Term]) -> Transmission {
        Transmission::new(terms.to_vec()).unwrap()
    }

    #[test]
    fn example1_schedule_matches_listing() {
        let p = params(4, 2, 6, 1, 1);
        let d = worst_case_demand(&p).unwrap();
        let schedule = build_transmissions(&p, &d).unwrap();
        assert_eq!(schedule.len(), 6);
        let expect = vec![
            tx(&[
                term(&[1, 2], &[3], &[1, 4]),
                term(&[2, 3], &[1], &[3, 4]),
                term(&[1, 4], &[3], &[1, 2]),
                term(&[3, 4], &[1], &[2, 3]),
            ]),
            tx(&[
                term(&[1, 2], &[3], &[2, 4]),
                term(&[1, 3], &[2], &[3, 4]),
                term(&[2, 4], &[3], &[1, 2]),
                term(&[3, 4], &[2], &[1, 3]),
            ]),
            tx(&[
                term(&[1, 2], &[4], &[1, 3]),
                term(&[2, 4], &[1], &[3, 4]),
                term(&[3, 4], &[1], &[2, 4]),
                term(&[1, 3], &[4], &[1, 2]),
            ]),
            tx(&[
                term(&[1, 2], &[4], &[2, 3]),
                term(&[1, 4], &[2], &[3, 4]),
                term(&[3, 4], &[2], &[1, 4]),
                term(&[2, 3], &[4], &[1, 2]),
            ]),
            tx(&[
                term(&[1, 3], &[2], &[1, 4]),
                term(&[2, 3], &[1], &[2, 4]),
                term(&[2, 4], &[1], &[2, 3]),
                term(&[1, 4], &[2], &[1, 3]),
            ]),
            tx(&[
                term(&[1, 3], &[4], &[2, 3]),
                term(&[1, 4], &[3], &[2, 4]),
                term(&[2, 4], &[3], &[1, 4]),
                term(&[2, 3], &[4], &[1, 3]),
            ]),
        ];
        assert_eq!(schedule, expect);
    }

    #[test]
    fn example2_schedule_counts() {
        let p = params(5, 2, 10, 1, 1);
        let d = worst_case_demand(&p).unwrap();
        let schedule = build_transmissions(&p, &d).unwrap();
        assert_eq!(schedule.len(), 40);
        let four_term = schedule.iter().filter(|t| t.len() == 4).count();
        let three_term = schedule.iter().filter(|t| t.len() == 3).count();
        assert_eq!((four_term, three_term), (30, 10));

        // the no-overlap construction walked through in the text
        let expected = tx(&[
            term(&[1, 2], &[3], &[4, 5]),
            term(&[1, 3], &[2], &[4, 5]),
            term(&[2, 3], &[1], &[4, 5]),
        ]);
        assert!(schedule.contains(&expected));
    }

    #[test]
    fn schedule_partitions_all_demands() {
        for (lambda, r) in [(4u8, 2u8), (5, 2), (6, 2), (6, 3), (7, 3)] {
            for t_a in 0..=(lambda - r) {
                let n = binom(lambda as i64, r as i64) as u32;
                let p = params(lambda, r, n, t_a, 1);
                let d = worst_case_demand(&p).unwrap();
                let schedule = build_transmissions(&p, &d).unwrap();
                let mut seen: BTreeSet<(UserId, IndexSet, Tag)> = BTreeSet::new();
                for t in &schedule {
                    for term in t.terms() {
                        assert!(
                            seen.insert((term.user.clone(), term.subfile.clone(), term.tag.clone())),
                            "duplicate coverage at lambda={lambda} r={r} t={t_a}"
                        );
                    }
                }
                let mut expected = 0usize;
                for u in all_users(lambda, r) {
                    expected += user_demand_set(&p, &u).unwrap().len();
                }
                assert_eq!(seen.len(), expected, "lambda={lambda} r={r} t={t_a}");
            }
        }
    }

    #[test]
    fn transmission_sizes_follow_the_overlap_law() {
        // every transmission serves coding_gain(i, t, r) users: C(t+r, t)
        // terms for disjoint orbits, 2 C(t+i, i) when the overlap is i
        for (lambda, r) in [(5u8, 2u8), (6, 2), (6, 3), (7, 3)] {
            for t_a in 0..=(lambda - r) {
                let n = binom(lambda as i64, r as i64) as u32;
                let p = params(lambda, r, n, t_a, 1);
                let d = worst_case_demand(&p).unwrap();
                for t in build_transmissions(&p, &d).unwrap() {
                    let overlap = t
                        .terms()
                        .iter()
                        .map(|term| {
                            term.user
                                .caches()
                                .intersection(term.tag.single_member().unwrap().caches())
                                .len() as u8
                        })
                        .max()
                        .unwrap();
                    assert_eq!(
                        t.len() as u64,
                        crate::bounds::coding_gain(overlap, t_a, r),
                        "size mismatch at lambda={lambda} r={r} t={t_a} overlap={overlap}"
                    );
                }
            }
        }
    }

    #[test]
    fn class_counts_match_closed_forms() {
        for (lambda, r) in [(5u8, 2u8), (6, 2), (6, 3), (7, 2), (7, 3)] {
            for t_a in 0..=(lambda - r) {
                let n = binom(lambda as i64, r as i64) as u32;
                let p = params(lambda, r, n, t_a, 1);
                let d = worst_case_demand(&p).unwrap();
                let schedule = build_transmissions(&p, &d).unwrap();
                let (lam, rr, t) = (lambda as i64, r as i64, t_a as i64);
                let f2 = binom(lam, t) * binom(lam - t, rr);
                let no_overlap = if binom(t + rr, rr) == 0 {
                    0
                } else {
                    f2 * binom(lam - rr - t, rr) / binom(t + rr, rr)
                };
                let expect_no = no_overlap as usize;
                let got_no = schedule
                    .iter()
                    .filter(|tx| tx.len() == binom(t + rr, t) as usize
                        && tx.terms().iter().all(|term| term
                            .user
                            .caches()
                            .is_disjoint(term.tag.single_member().unwrap().caches())))
                    .count();
                assert_eq!(got_no, expect_no, "I=0 count lambda={lambda} r={r} t={t_a}");
                // overlap size r would force the tag user to equal the
                // demanding user, so classes stop at r - 1
                for i in 1..rr {
                    let expect = f2 * binom(rr, i) * binom(lam - rr - t, rr - i)
                        / (2 * binom(t + i, i));
                    let got = schedule
                        .iter()
                        .filter(|tx| {
                            tx.terms().iter().any(|term| {
                                term.user
                                    .caches()
                                    .intersection(term.tag.single_member().unwrap().caches())
                                    .len() as i64
                                    == i
                            }) && tx.len() == 2 * binom(t + i, i) as usize
                        })
                        .count();
                    assert_eq!(got as u64, expect, "I={i} count lambda={lambda} r={r} t={t_a}");
                }
            }
        }
    }

    #[test]
    fn repeated_demands_partition_identically() {
        // the orbit structure never looks at file indices, so a demand
        // vector with repeats produces the same schedule shape
        let p = params(5, 2, 10, 1, 1);
        let worst = worst_case_demand(&p).unwrap();
        let repeated = DemandVector::new(
            all_users(5, 2)
                .into_iter()
                .enumerate()
                .map(|(i, u)| (u, 1 + (i as u32 % 3)))
                .collect(),
        );
        let a = build_transmissions(&p, &worst).unwrap();
        let b = build_transmissions(&p, &repeated).unwrap();
        assert_eq!(a.len(), b.len());
        let shape = |s: &[Transmission]| {
            s.iter()
                .map(|t| {
                    t.terms()
                        .iter()
                        .map(|x| (x.user.clone(), x.subfile.clone(), x.tag.clone()))
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(shape(&a), shape(&b));
    }

    #[test]
    fn reversed_selection_keeps_the_count() {
        for (lambda, r, t_a) in [(4u8, 2u8, 1u8), (5, 2, 1), (5, 2, 2), (6, 3, 1), (6, 2, 2)] {
            let n = binom(lambda as i64, r as i64) as u32;
            let p = params(lambda, r, n, t_a, 1);
            let d = worst_case_demand(&p).unwrap();
            let lex = build_transmissions(&p, &d).unwrap();
            let rev =
                build_transmissions_with_order(&p, &d, SelectionOrder::ReverseLexicographic)
                    .unwrap();
            assert_eq!(lex.len(), rev.len());
        }
    }

    #[test]
    fn zero_private_memory_reduces_to_cmacc() {
        for (lambda, r) in [(4u8, 2u8), (5, 2), (6, 3)] {
            for t_a in 0..=(lambda - r) {
                let n = binom(lambda as i64, r as i64) as u32;
                let p = params(lambda, r, n, t_a, 0);
                let d = worst_case_demand(&p).unwrap();
                let ours: BTreeSet<Transmission> =
                    build_transmissions(&p, &d).unwrap().into_iter().collect();
                let cmacc: BTreeSet<Transmission> =
                    cmacc_delivery(lambda, r, t_a, &d).unwrap().into_iter().collect();
                assert_eq!(ours, cmacc);
                assert_eq!(ours.len() as u64, binom(lambda as i64, (t_a + r) as i64));
            }
        }
    }

    #[test]
    fn cmacc_counts() {
        let p = params(4, 2, 6, 1, 0);
        let d = worst_case_demand(&p).unwrap();
        assert_eq!(cmacc_delivery(4, 2, 1, &d).unwrap().len(), 4);

        let p = params(5, 2, 10, 1, 0);
        let d = worst_case_demand(&p).unwrap();
        assert_eq!(cmacc_delivery(5, 2, 1, &d).unwrap().len(), 10);

        let p = params(5, 2, 10, 3, 0);
        let d = worst_case_demand(&p).unwrap();
        assert_eq!(cmacc_delivery(5, 2, 3, &d).unwrap().len(), 1);
    }

    fn man_demand(k: u8) -> DemandVector {
        let map = (1..=k)
            .map(|i| (UserId::new(IndexSet::singleton(i)), i as u32))
            .collect();
        DemandVector::new(map)
    }

    #[test]
    fn man_counts() {
        assert_eq!(man_delivery(6, 4, &man_demand(6)).unwrap().len(), 6);
        let two = man_delivery(2, 1, &man_demand(2)).unwrap();
        assert_eq!(two.len(), 1);
        assert_eq!(
            two[0],
            tx(&[
                Term::new(user(&[1]), set(&[2]), Tag::empty()),
                Term::new(user(&[2]), set(&[1]), Tag::empty()),
            ])
        );
        assert_eq!(man_delivery(4, 4, &man_demand(4)).unwrap().len(), 0);
    }

    #[test]
    fn lambda4_tp2_schedule() {
        let p = params(4, 2, 6, 1, 2);
        let d = worst_case_demand(&p).unwrap();
        let schedule = lambda4_tp2_delivery(&p, &d).unwrap();
        assert_eq!(schedule.len(), 2);
        assert!(schedule.iter().all(|t| t.len() == 6));
        // together the two transmissions cover each user's two missing minis
        let mut covered: BTreeSet<(UserId, IndexSet, Tag)> = BTreeSet::new();
        for t in &schedule {
            for term in t.terms() {
                assert!(covered.insert((term.user.clone(), term.subfile.clone(), term.tag.clone())));
            }
        }
        assert_eq!(covered.len(), 12);
        assert!(lambda4_tp2_delivery(&params(4, 2, 6, 1, 1), &d).is_err());
    }

    #[test]
    fn schedule_for_dispatches() {
        let d4 = worst_case_demand(&params(4, 2, 6, 1, 1)).unwrap();
        assert_eq!(schedule_for(&params(4, 2, 6, 1, 1), &d4).unwrap().len(), 6);
        assert_eq!(schedule_for(&params(4, 2, 6, 1, 2), &d4).unwrap().len(), 2);
        // fully covered private caches need no transmissions
        assert_eq!(schedule_for(&params(4, 2, 6, 1, 3), &d4).unwrap().len(), 0);
        assert!(schedule_for(&params(5, 2, 60, 1, 2), &worst_case_demand(&params(5, 2, 60, 1, 2)).unwrap()).is_err());
    }

    #[test]
    fn term_and_transmission_render_compactly() {
        let t = tx(&[
            term(&[1, 2], &[3], &[1, 4]),
            term(&[2, 3], &[1], &[3, 4]),
        ]);
        assert_eq!(t.to_string(), "d(12)|3|14+d(23)|1|34");
        let empty_tag = Term::new(user(&[1, 2]), set(&[3]), Tag::empty());
        assert_eq!(empty_tag.to_string(), "d(12)|3|");
    }

    #[test]
    fn t_zero_orbits() {
        // with t = 0 overlap orbits collapse to flip pairs and disjoint
        // orbits to single terms
        let p = params(4, 2, 6, 0, 1);
        let d = worst_case_demand(&p).unwrap();
        let schedule = build_transmissions(&p, &d).unwrap();
        assert!(schedule.iter().all(|t| t.len() == 2 || t.len() == 1));
        let singles = schedule.iter().filter(|t| t.len() == 1).count();
        let pairs = schedule.iter().filter(|t| t.len() == 2).count();
        // C(4,2) users, 5 demanded minis each (tags != own), I=0 pairs: 12/34 13/24 14/23
        assert_eq!(singles, 6);
        assert_eq!(pairs, (6 * 5 - 6) / 2);
    }
}
