//! Cache placement: access caches hold whole subfiles, private caches hold
//! mini-subfiles, plus the memory-sharing file split for fractional
//! replication factors.
//!
//! Each file splits into `C(lambda, t_a)` subfiles indexed by the
//! `t_a`-subsets of caches; access cache `a` stores every subfile whose
//! index set contains `a`. Each subfile splits further into
//! `C(C(lambda - t_a, r), t_p)` mini-subfiles, tagged by `t_p`-sets of the
//! users that miss the subfile; a user's private cache stores exactly the
//! mini-subfiles whose tag contains it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_integer::Integer;
use serde_json::{json, Value};

use crate::combinatorics::{binom, k_subsets, IndexSet};
use crate::model::{all_users, SystemParams, UserId};
use crate::rational::{rat, Rat};
use crate::{Error, Result};

/// The set of users a mini-subfile is privately cached at.
///
/// Members are distinct user sets, kept sorted, each disjoint from the
/// owning subfile's index set. `t_p = 1` gives a single member, `t_p = 0`
/// (no private memory) an empty tag.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Tag(Vec<UserId>);

impl Tag {
    pub fn new(members: impl IntoIterator<Item = UserId>) -> Self {
        let mut v: Vec<UserId> = members.into_iter().collect();
        v.sort();
        v.dedup();
        Tag(v)
    }

    pub fn empty() -> Self {
        Tag(Vec::new())
    }

    pub fn single(user: UserId) -> Self {
        Tag(vec![user])
    }

    pub fn members(&self) -> &[UserId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, user: &UserId) -> bool {
        self.0.binary_search(user).is_ok()
    }

    /// The tag's single member; errors unless `t_p = 1`.
    pub fn single_member(&self) -> Result<&UserId> {
        match self.0.as_slice() {
            [u] => Ok(u),
            _ => Err(Error::Parameter(format!(
                "expected a single-user tag, got {self}"
            ))),
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|u| u.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// One subfile: `(file, t_a-subset of caches)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SubfileId {
    pub file: u32,
    pub subfile: IndexSet,
}

/// One atomic symbol of the scheme: a mini-subfile of `file`, belonging to
/// subfile `subfile`, privately cached at the users in `tag`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MiniSubfileId {
    pub file: u32,
    pub subfile: IndexSet,
    pub tag: Tag,
}

impl fmt::Display for MiniSubfileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "W({}|{}|{})", self.file, self.subfile, self.tag)
    }
}

/// Full cache contents: subfiles per access cache, mini-subfiles per user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlacementMap {
    pub access: BTreeMap<u8, BTreeSet<SubfileId>>,
    pub private: BTreeMap<UserId, BTreeSet<MiniSubfileId>>,
}

fn integer_t_access(params: &SystemParams) -> Result<u8> {
    params.integer_t_access().ok_or_else(|| {
        Error::Parameter(format!(
            "t_access = {} is fractional; apply the memory split first",
            params.t_access()
        ))
    })
}

fn integer_t_private(params: &SystemParams) -> Result<u64> {
    params.integer_t_private().ok_or_else(|| {
        Error::Parameter(format!(
            "t_private = {} is fractional; apply the memory split first",
            params.t_private()
        ))
    })
}

/// All subfile index sets, in lexicographic order.
pub fn subfile_universe(lambda: u8, t_access: u8) -> Vec<IndexSet> {
    k_subsets(&IndexSet::universe(lambda), t_access as usize)
}

/// Users that miss subfile `subfile`: the r-subsets of the remaining
/// caches, in lexicographic order.
pub fn wanting_users(lambda: u8, r: u8, subfile: &IndexSet) -> Vec<UserId> {
    let rest = IndexSet::universe(lambda).difference(subfile);
    k_subsets(&rest, r as usize).into_iter().map(UserId::new).collect()
}

/// All tags of one subfile: the `t_p`-subsets of its wanting users.
pub fn subfile_tags(lambda: u8, r: u8, t_private: u64, subfile: &IndexSet) -> Vec<Tag> {
    let wanters = wanting_users(lambda, r, subfile);
    if t_private as usize > wanters.len() {
        return Vec::new();
    }
    // index combinations over the wanter list keep lexicographic tag order
    k_subsets(&IndexSet::range(1, wanters.len() as u8), t_private as usize)
        .into_iter()
        .map(|pick| Tag::new(pick.iter().map(|i| wanters[i as usize - 1].clone())))
        .collect()
}

/// Every mini-subfile of one file, lexicographic by (subfile, tag).
pub fn file_minis(params: &SystemParams, file: u32) -> Result<Vec<MiniSubfileId>> {
    let t_a = integer_t_access(params)?;
    let t_p = integer_t_private(params)?;
    let mut out = Vec::new();
    for subfile in subfile_universe(params.lambda, t_a) {
        for tag in subfile_tags(params.lambda, params.r, t_p, &subfile) {
            out.push(MiniSubfileId { file, subfile: subfile.clone(), tag });
        }
    }
    Ok(out)
}

/// Access-cache contents: cache `a` holds every subfile indexed by a set
/// containing `a`, for every file.
pub fn access_placement(params: &SystemParams) -> Result<BTreeMap<u8, BTreeSet<SubfileId>>> {
    let t_a = integer_t_access(params)?;
    let subfiles = subfile_universe(params.lambda, t_a);
    let mut map: BTreeMap<u8, BTreeSet<SubfileId>> = BTreeMap::new();
    for a in 1..=params.lambda {
        let mut set = BTreeSet::new();
        for subfile in subfiles.iter().filter(|s| s.contains(a)) {
            for file in 1..=params.n_files {
                set.insert(SubfileId { file, subfile: subfile.clone() });
            }
        }
        map.insert(a, set);
    }
    Ok(map)
}

/// Private-cache contents: user `u` holds every mini-subfile whose tag
/// contains it.
///
/// When every subfile is already reachable through access caches the
/// private caches come back empty; when `1 <= wanters < t_p` no valid tag
/// exists and the configuration is rejected.
pub fn private_placement(
    params: &SystemParams,
) -> Result<BTreeMap<UserId, BTreeSet<MiniSubfileId>>> {
    let t_a = integer_t_access(params)?;
    let t_p = integer_t_private(params)?;
    let c = binom(params.lambda as i64 - t_a as i64, params.r as i64);
    if c > 0 && t_p > c {
        return Err(Error::Unsupported(format!(
            "t_private = {t_p} exceeds the {c} users wanting each subfile"
        )));
    }
    let mut map: BTreeMap<UserId, BTreeSet<MiniSubfileId>> = all_users(params.lambda, params.r)
        .into_iter()
        .map(|u| (u, BTreeSet::new()))
        .collect();
    if t_p == 0 {
        return Ok(map);
    }
    for subfile in subfile_universe(params.lambda, t_a) {
        for tag in subfile_tags(params.lambda, params.r, t_p, &subfile) {
            for user in tag.members() {
                let entry = map.get_mut(user).expect("tag member is a valid user");
                for file in 1..=params.n_files {
                    entry.insert(MiniSubfileId {
                        file,
                        subfile: subfile.clone(),
                        tag: tag.clone(),
                    });
                }
            }
        }
    }
    Ok(map)
}

/// Both cache types together.
pub fn placement(params: &SystemParams) -> Result<PlacementMap> {
    Ok(PlacementMap {
        access: access_placement(params)?,
        private: private_placement(params)?,
    })
}

/// True when `user` can read `mini` from its caches: the subfile index
/// meets the user's caches, or the tag names the user.
pub fn user_can_read(user: &UserId, mini: &MiniSubfileId) -> bool {
    !mini.subfile.is_disjoint(user.caches()) || mini.tag.contains(user)
}

/// Every mini-subfile of every file that `user` can read.
pub fn readable_minis(params: &SystemParams, user: &UserId) -> Result<BTreeSet<MiniSubfileId>> {
    let mut out = BTreeSet::new();
    for file in 1..=params.n_files {
        for mini in file_minis(params, file)? {
            if user_can_read(user, &mini) {
                out.insert(mini);
            }
        }
    }
    Ok(out)
}

/// The mini-subfiles of `file` that `user` cannot read and must receive.
pub fn demanded_minis(
    params: &SystemParams,
    user: &UserId,
    file: u32,
) -> Result<BTreeSet<MiniSubfileId>> {
    Ok(file_minis(params, file)?
        .into_iter()
        .filter(|m| !user_can_read(user, m))
        .collect())
}

/// A memory-sharing split of one replication factor between its adjacent
/// integers: `alpha` of each file runs at `t_hi`, the rest at `t_lo`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorySplit {
    pub alpha: Rat,
    pub t_lo: u64,
    pub t_hi: u64,
}

fn split(t: Rat) -> MemorySplit {
    let floor = t.floor().to_integer() as u64;
    if t.is_integer() {
        MemorySplit { alpha: rat(1), t_lo: floor, t_hi: floor }
    } else {
        MemorySplit { alpha: t - t.floor(), t_lo: floor, t_hi: floor + 1 }
    }
}

/// Split of the access replication factor `t_a`; an integer `t_a` yields
/// `alpha = 1` with `t_lo = t_hi`.
pub fn access_memory_split(params: &SystemParams) -> Result<MemorySplit> {
    let t = params.t_access();
    if t < rat(0) || t > rat(params.lambda as i128) {
        return Err(Error::Parameter(format!("t_access = {t} outside [0, lambda]")));
    }
    Ok(split(t))
}

/// Split of the private replication factor `t_p` over `K`.
pub fn private_memory_split(params: &SystemParams) -> Result<MemorySplit> {
    let t = params.t_private();
    if t < rat(0) {
        return Err(Error::Parameter(format!("t_private = {t} is negative")));
    }
    Ok(split(t))
}

/// One constituent of a memory-shared placement: `weight` of every file's
/// bits placed with access replication `t_access`.
#[derive(Clone, Debug)]
pub struct PlacementPart {
    pub weight: Rat,
    pub t_access: u8,
    pub subpacketization: u64,
    pub placement: PlacementMap,
}

/// Placement for a fractional `t_a`, as the weighted pair of integer-`t`
/// placements (a single part when `t_a` is already an integer).
#[derive(Clone, Debug)]
pub struct SharedPlacement {
    pub params: SystemParams,
    pub parts: Vec<PlacementPart>,
}

/// Builds the memory-shared placement; `t_p` must be an integer.
pub fn shared_placement(params: &SystemParams) -> Result<SharedPlacement> {
    integer_t_private(params)?;
    let access_split = access_memory_split(params)?;
    let mut pieces = vec![(access_split.alpha, access_split.t_hi)];
    if access_split.t_lo != access_split.t_hi {
        pieces.push((rat(1) - access_split.alpha, access_split.t_lo));
    }
    let mut parts = Vec::new();
    for (weight, t) in pieces {
        if weight == rat(0) {
            continue;
        }
        let mut part_params = params.clone();
        part_params.m_access =
            rat(t as i128) * rat(params.n_files as i128) / rat(params.lambda as i128);
        let fp = part_params.subpacketization().ok_or_else(|| {
            Error::Invariant("integer part of a split lost integrality".into())
        })?;
        parts.push(PlacementPart {
            weight,
            t_access: t as u8,
            subpacketization: fp,
            placement: placement(&part_params)?,
        });
    }
    Ok(SharedPlacement { params: params.clone(), parts })
}

impl SharedPlacement {
    /// Smallest file size in bits making every part's subfile and
    /// mini-subfile sizes integral.
    pub fn minimal_file_bits(&self) -> u64 {
        let mut b: u64 = 1;
        for part in &self.parts {
            // weight * B must be an integer divisible by the part's
            // subpacketization (or by C(lambda, t) when no minis exist)
            let grain = if part.subpacketization > 0 {
                part.subpacketization
            } else {
                binom(self.params.lambda as i64, part.t_access as i64)
            };
            let denom = *part.weight.denom() as u64;
            let numer = *part.weight.numer() as u64;
            let needed = denom * (grain / grain.gcd(&numer)).max(1);
            b = b.lcm(&needed);
        }
        b
    }

    fn part_bits(&self, part: &PlacementPart, file_bits: u64) -> Result<u64> {
        let bits = part.weight * rat(file_bits as i128);
        if !bits.is_integer() {
            return Err(Error::Parameter(format!(
                "file_bits = {file_bits} does not split at weight {}",
                part.weight
            )));
        }
        Ok(bits.to_integer() as u64)
    }

    /// Exact bits stored in access cache `a` under file size `file_bits`.
    pub fn access_cache_bits(&self, a: u8, file_bits: u64) -> Result<u64> {
        let mut total = 0u64;
        for part in &self.parts {
            let part_bits = self.part_bits(part, file_bits)?;
            let per_subfile =
                part_bits / binom(self.params.lambda as i64, part.t_access as i64);
            let stored = part.placement.access.get(&a).map_or(0, |s| s.len() as u64);
            total += stored * per_subfile;
        }
        Ok(total)
    }

    /// Exact bits stored in `user`'s private cache under `file_bits`.
    pub fn private_cache_bits(&self, user: &UserId, file_bits: u64) -> Result<u64> {
        let mut total = 0u64;
        for part in &self.parts {
            let part_bits = self.part_bits(part, file_bits)?;
            if part.subpacketization == 0 {
                continue;
            }
            let per_mini = part_bits / part.subpacketization;
            let stored = part.placement.private.get(user).map_or(0, |s| s.len() as u64);
            total += stored * per_mini;
        }
        Ok(total)
    }
}

fn index_set_json(s: &IndexSet) -> Value {
    Value::Array(s.iter().map(|e| json!(e)).collect())
}

fn tag_json(tag: &Tag) -> Value {
    Value::Array(tag.members().iter().map(|u| index_set_json(u.caches())).collect())
}

/// Scheme dump: the placement as JSON.
///
/// Layout:
/// ```json
/// {
///   "params": {"lambda": 4, "r": 2, "n_files": 6, "m_access": "3/2", ...},
///   "access": [{"cache": 1, "subfiles": [{"file": 1, "subfile": [1]}, ...]}, ...],
///   "private": [{"user": [1,2], "minis": [{"file": 1, "subfile": [3], "tag": [[1,2]]}, ...]}, ...]
/// }
/// ```
pub fn placement_json(params: &SystemParams, placement: &PlacementMap) -> Value {
    let access: Vec<Value> = placement
        .access
        .iter()
        .map(|(a, subs)| {
            json!({
                "cache": a,
                "subfiles": subs
                    .iter()
                    .map(|s| json!({"file": s.file, "subfile": index_set_json(&s.subfile)}))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    let private: Vec<Value> = placement
        .private
        .iter()
        .map(|(u, minis)| {
            json!({
                "user": index_set_json(u.caches()),
                "minis": minis
                    .iter()
                    .map(|m| json!({
                        "file": m.file,
                        "subfile": index_set_json(&m.subfile),
                        "tag": tag_json(&m.tag),
                    }))
                    .collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "params": {
            "lambda": params.lambda,
            "r": params.r,
            "n_files": params.n_files,
            "m_access": params.m_access.to_string(),
            "m_private": params.m_private.to_string(),
            "t_access": params.t_access().to_string(),
            "t_private": params.t_private().to_string(),
            "subpacketization": params.subpacketization(),
        },
        "access": access,
        "private": private,
    })
}
