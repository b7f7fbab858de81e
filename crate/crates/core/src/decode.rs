//! Decoding checks: symbolic peeling over mini-subfile identities and a
//! bit-exact XOR round trip over pseudorandom file contents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::combinatorics::{binom, rank, IndexSet};
use crate::delivery::{schedule_for, Transmission};
use crate::model::{all_users, DemandVector, SystemParams, UserId};
use crate::placement::{
    demanded_minis, readable_minis, subfile_tags, subfile_universe, MiniSubfileId,
};
use crate::{Error, Result};

/// Everything one user can currently read: cache contents plus whatever
/// peeling has recovered so far.
#[derive(Clone, Debug)]
pub struct UserKnowledge {
    user: UserId,
    known: BTreeSet<MiniSubfileId>,
}

impl UserKnowledge {
    /// The user's initial knowledge from its access and private caches.
    pub fn initial(params: &SystemParams, user: &UserId) -> Result<Self> {
        Ok(UserKnowledge { user: user.clone(), known: readable_minis(params, user)? })
    }

    pub fn user(&self) -> &UserId {
        &self.user
    }

    pub fn knows(&self, mini: &MiniSubfileId) -> bool {
        self.known.contains(mini)
    }

    pub fn len(&self) -> usize {
        self.known.len()
    }

    pub fn is_empty(&self) -> bool {
        self.known.is_empty()
    }
}

/// Peels the schedule from `user`'s point of view: any transmission with
/// exactly one unknown term yields that term. Iterates to a fixpoint and
/// returns the newly decoded mini-subfiles.
pub fn peel_decode(
    schedule: &[Transmission],
    knowledge: &mut UserKnowledge,
    d: &DemandVector,
) -> Result<BTreeSet<MiniSubfileId>> {
    let mut decoded = BTreeSet::new();
    let resolved: Result<Vec<Vec<MiniSubfileId>>> = schedule
        .iter()
        .map(|t| t.terms().iter().map(|term| term.to_mini(d)).collect())
        .collect();
    let resolved = resolved?;
    loop {
        let mut progress = false;
        for minis in &resolved {
            let mut unknown = minis.iter().filter(|m| !knowledge.known.contains(m));
            if let (Some(first), None) = (unknown.next(), unknown.next()) {
                knowledge.known.insert(first.clone());
                decoded.insert(first.clone());
                progress = true;
            }
        }
        if !progress {
            return Ok(decoded);
        }
    }
}

/// Per-user outcome of a verification run.
#[derive(Clone, Debug)]
pub struct UserVerification {
    pub user: UserId,
    pub demanded: usize,
    pub decoded: usize,
    pub missing: Vec<MiniSubfileId>,
}

/// Outcome of checking a schedule against every user's demand.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub per_user: Vec<UserVerification>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn missing_total(&self) -> usize {
        self.per_user.iter().map(|u| u.missing.len()).sum()
    }

    /// Machine-readable one-liner, e.g. `PASS users=6 missing=0`.
    pub fn summary_line(&self) -> String {
        format!(
            "{} users={} missing={}",
            if self.pass { "PASS" } else { "FAIL" },
            self.per_user.len(),
            self.missing_total(),
        )
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for u in &self.per_user {
            write!(f, "user {}: demanded={} decoded={}", u.user, u.demanded, u.decoded)?;
            if u.missing.is_empty() {
                writeln!(f, " ok")?;
            } else {
                let names: Vec<String> = u.missing.iter().map(|m| m.to_string()).collect();
                writeln!(f, " missing [{}]", names.join(", "))?;
            }
        }
        writeln!(f, "{}", self.summary_line())
    }
}

/// Runs peeling for every user and reports who recovers its full file.
pub fn verify_all(
    params: &SystemParams,
    d: &DemandVector,
    schedule: &[Transmission],
) -> Result<VerificationReport> {
    let mut per_user = Vec::new();
    for user in all_users(params.lambda, params.r) {
        let wanted = demanded_minis(params, &user, d.file_of(&user)?)?;
        let mut knowledge = UserKnowledge::initial(params, &user)?;
        let decoded = peel_decode(schedule, &mut knowledge, d)?;
        let missing: Vec<MiniSubfileId> =
            wanted.iter().filter(|m| !knowledge.knows(m)).cloned().collect();
        per_user.push(UserVerification {
            user,
            demanded: wanted.len(),
            decoded: decoded.len(),
            missing,
        });
    }
    let pass = per_user.iter().all(|u| u.missing.is_empty());
    Ok(VerificationReport { per_user, pass })
}

/// A bit string of arbitrary length, backed by bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitBlock {
    bytes: Vec<u8>,
    bits: usize,
}

impl BitBlock {
    fn zero(bits: usize) -> Self {
        BitBlock { bytes: vec![0; bits.div_ceil(8)], bits }
    }

    fn random(rng: &mut impl Rng, bits: usize) -> Self {
        let mut b = BitBlock::zero(bits);
        rng.fill(b.bytes.as_mut_slice());
        b.mask_tail();
        b
    }

    fn mask_tail(&mut self) {
        // bits are MSB-first, so the unused tail is the low end
        let extra = self.bytes.len() * 8 - self.bits;
        if extra > 0 {
            if let Some(last) = self.bytes.last_mut() {
                *last &= 0xffu8 << extra;
            }
        }
    }

    fn xor_assign(&mut self, other: &BitBlock) {
        assert_eq!(self.bits, other.bits, "xor of unequal-sized blocks");
        for (a, b) in self.bytes.iter_mut().zip(&other.bytes) {
            *a ^= b;
        }
    }

    fn get_bit(&self, i: usize) -> bool {
        self.bytes[i / 8] >> (7 - i % 8) & 1 == 1
    }

    fn set_bit(&mut self, i: usize, v: bool) {
        let mask = 1u8 << (7 - i % 8);
        if v {
            self.bytes[i / 8] |= mask;
        } else {
            self.bytes[i / 8] &= !mask;
        }
    }

    fn slice(&self, start: usize, len: usize) -> BitBlock {
        assert!(start + len <= self.bits);
        if start.is_multiple_of(8) && len.is_multiple_of(8) {
            let bytes = self.bytes[start / 8..(start + len) / 8].to_vec();
            return BitBlock { bytes, bits: len };
        }
        let mut out = BitBlock::zero(len);
        for i in 0..len {
            out.set_bit(i, self.get_bit(start + i));
        }
        out
    }

    fn write_into(&self, target: &mut BitBlock, start: usize) {
        assert!(start + self.bits <= target.bits);
        if start.is_multiple_of(8) && self.bits.is_multiple_of(8) {
            target.bytes[start / 8..(start + self.bits) / 8].copy_from_slice(&self.bytes);
            return;
        }
        for i in 0..self.bits {
            target.set_bit(start + i, self.get_bit(i));
        }
    }

    fn diff_bytes(&self, other: &BitBlock) -> usize {
        self.bytes.iter().zip(&other.bytes).filter(|(a, b)| a != b).count()
    }
}

/// Bit-level positions: every mini-subfile of a file occupies one slot of
/// `file_bits / F` bits, ordered by (subfile rank, tag rank).
struct MiniLayout {
    slots: Vec<(IndexSet, crate::placement::Tag)>,
    index: BTreeMap<(IndexSet, crate::placement::Tag), usize>,
    mini_bits: usize,
}

impl MiniLayout {
    fn new(params: &SystemParams, file_bits: u64) -> Result<Self> {
        let t_a = params.integer_t_access().ok_or_else(|| {
            Error::Parameter(format!("t_access = {} is not an integer", params.t_access()))
        })?;
        let t_p = params.integer_t_private().ok_or_else(|| {
            Error::Parameter(format!("t_private = {} is not an integer", params.t_private()))
        })?;
        let fp = params.subpacketization().unwrap_or(0);
        if fp == 0 {
            return Err(Error::Parameter("no mini-subfile layout in the degenerate corner".into()));
        }
        if !file_bits.is_multiple_of(fp) {
            return Err(Error::Parameter(format!(
                "file_bits = {file_bits} not divisible by subpacketization = {fp}"
            )));
        }
        let mini_bits = (file_bits / fp) as usize;
        let mut slots = Vec::with_capacity(fp as usize);
        for subfile in subfile_universe(params.lambda, t_a) {
            for tag in subfile_tags(params.lambda, params.r, t_p, &subfile) {
                slots.push((subfile.clone(), tag));
            }
        }
        debug_assert_eq!(slots.len() as u64, fp);
        let index = slots
            .iter()
            .enumerate()
            .map(|(i, key)| (key.clone(), i))
            .collect();
        Ok(MiniLayout { slots, index, mini_bits })
    }

    fn slot(&self, mini: &MiniSubfileId) -> Result<usize> {
        self.index
            .get(&(mini.subfile.clone(), mini.tag.clone()))
            .copied()
            .ok_or_else(|| Error::Parameter(format!("no layout slot for {mini}")))
    }
}

/// Outcome of the bit-exact round trip.
#[derive(Clone, Debug)]
pub struct SimulationOutcome {
    pub pass: bool,
    /// Users whose rebuilt file differs, with the number of differing bytes.
    pub mismatches: Vec<(UserId, usize)>,
}

impl SimulationOutcome {
    pub fn summary_line(&self) -> String {
        if self.pass {
            "PASS bit-exact".to_string()
        } else {
            let parts: Vec<String> = self
                .mismatches
                .iter()
                .map(|(u, n)| format!("{u}:{n}B"))
                .collect();
            format!("FAIL mismatches {}", parts.join(" "))
        }
    }
}

/// End-to-end XOR delivery over pseudorandom file bits.
///
/// Files are generated from `seed`, caches filled per the placement,
/// transmissions XORed at mini-subfile granularity, and every user rebuilds
/// its demanded file from cache contents plus peeled transmissions. Passes
/// when each rebuilt file equals the original byte for byte.
pub fn bitlevel_roundtrip(
    params: &SystemParams,
    d: &DemandVector,
    seed: u64,
) -> Result<SimulationOutcome> {
    let schedule = schedule_for(params, d)?;
    bitlevel_roundtrip_with_schedule(params, d, &schedule, seed)
}

/// [`bitlevel_roundtrip`] with a caller-supplied schedule.
pub fn bitlevel_roundtrip_with_schedule(
    params: &SystemParams,
    d: &DemandVector,
    schedule: &[Transmission],
    seed: u64,
) -> Result<SimulationOutcome> {
    roundtrip_impl(params, d, schedule, seed, None)
}

/// `corrupt` flips one bit of one payload before delivery.
fn roundtrip_impl(
    params: &SystemParams,
    d: &DemandVector,
    schedule: &[Transmission],
    seed: u64,
    corrupt: Option<(usize, usize)>,
) -> Result<SimulationOutcome> {
    let file_bits = params.file_bits.ok_or_else(|| {
        Error::Parameter("bit-level simulation needs file_bits".into())
    })? as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let files: Vec<BitBlock> = (0..params.n_files)
        .map(|_| BitBlock::random(&mut rng, file_bits))
        .collect();

    let fp = params.subpacketization().unwrap_or(0) as usize;
    if fp == 0 {
        return degenerate_roundtrip(params, d, &files, file_bits);
    }
    let layout = MiniLayout::new(params, file_bits as u64)?;
    // global index of a mini: (file - 1) * F + layout slot
    let content = |global: usize| -> BitBlock {
        let file = &files[global / fp];
        file.slice(global % fp * layout.mini_bits, layout.mini_bits)
    };

    // resolve every transmission's terms to global indices once
    let resolved: Vec<Vec<usize>> = schedule
        .iter()
        .map(|t| {
            t.terms()
                .iter()
                .map(|term| {
                    let mini = term.to_mini(d)?;
                    Ok((mini.file as usize - 1) * fp + layout.slot(&mini)?)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    // server-side payloads, one mini-subfile length each
    let mut payloads = Vec::with_capacity(schedule.len());
    for minis in &resolved {
        let mut payload = BitBlock::zero(layout.mini_bits);
        for &g in minis {
            payload.xor_assign(&content(g));
        }
        payloads.push(payload);
    }
    if let Some((tx, bit)) = corrupt {
        let payload = &mut payloads[tx];
        payload.set_bit(bit, !payload.get_bit(bit));
    }

    let mut mismatches = Vec::new();
    for user in all_users(params.lambda, params.r) {
        // cache visibility is per slot, identical across files
        let readable: Vec<bool> = layout
            .slots
            .iter()
            .map(|(s, tag)| !s.is_disjoint(user.caches()) || tag.contains(&user))
            .collect();
        // bits recovered by peeling, keyed by global index
        let mut peeled: BTreeMap<usize, BitBlock> = BTreeMap::new();
        loop {
            let mut progress = false;
            for (minis, payload) in resolved.iter().zip(&payloads) {
                let mut unknown = minis
                    .iter()
                    .copied()
                    .filter(|&g| !readable[g % fp] && !peeled.contains_key(&g));
                let (lone, second) = (unknown.next(), unknown.next());
                if let (Some(lone), None) = (lone, second) {
                    let mut value = payload.clone();
                    for &g in minis {
                        if g == lone {
                            continue;
                        }
                        match peeled.get(&g) {
                            Some(bits) => value.xor_assign(bits),
                            None => value.xor_assign(&content(g)),
                        }
                    }
                    peeled.insert(lone, value);
                    progress = true;
                }
            }
            if !progress {
                break;
            }
        }
        // rebuild the demanded file
        let wanted_file = d.file_of(&user)? as usize;
        let mut rebuilt = BitBlock::zero(file_bits);
        let mut complete = true;
        for (slot, slot_readable) in readable.iter().enumerate() {
            let g = (wanted_file - 1) * fp + slot;
            let bits = if *slot_readable {
                Some(content(g))
            } else {
                peeled.get(&g).cloned()
            };
            match bits {
                Some(b) => b.write_into(&mut rebuilt, slot * layout.mini_bits),
                None => complete = false,
            }
        }
        let original = &files[wanted_file - 1];
        if !complete || &rebuilt != original {
            mismatches.push((user, original.diff_bytes(&rebuilt).max(1)));
        }
    }
    Ok(SimulationOutcome { pass: mismatches.is_empty(), mismatches })
}

/// Round trip for the corner with no mini-subfile structure: every
/// subfile reaches every user through its access caches.
fn degenerate_roundtrip(
    params: &SystemParams,
    d: &DemandVector,
    files: &[BitBlock],
    file_bits: usize,
) -> Result<SimulationOutcome> {
    let t_a = params.integer_t_access().ok_or_else(|| {
        Error::Parameter(format!("t_access = {} is not an integer", params.t_access()))
    })?;
    let subfiles = subfile_universe(params.lambda, t_a);
    let grain = binom(params.lambda as i64, t_a as i64);
    if !(file_bits as u64).is_multiple_of(grain) {
        return Err(Error::Parameter(format!(
            "file_bits = {file_bits} not divisible by subfile count = {grain}"
        )));
    }
    let subfile_bits = file_bits / grain as usize;
    let mut mismatches = Vec::new();
    for user in all_users(params.lambda, params.r) {
        let wanted_file = d.file_of(&user)?;
        let original = &files[wanted_file as usize - 1];
        let mut rebuilt = BitBlock::zero(file_bits);
        let mut complete = true;
        for subfile in &subfiles {
            if subfile.is_disjoint(user.caches()) {
                complete = false;
                continue;
            }
            let ground = IndexSet::universe(params.lambda);
            let offset = (rank(subfile, &ground)? - 1) as usize * subfile_bits;
            original.slice(offset, subfile_bits).write_into(&mut rebuilt, offset);
        }
        if !complete || &rebuilt != original {
            mismatches.push((user, original.diff_bytes(&rebuilt).max(1)));
        }
    }
    Ok(SimulationOutcome { pass: mismatches.is_empty(), mismatches })
}
