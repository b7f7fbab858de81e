//! System parameters, user identities, demand vectors, and the derived
//! replication factors with validity checks.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, ToPrimitive};

use crate::combinatorics::{binom, binom_checked, k_subsets, rank, IndexSet};
use crate::rational::{as_integer, parse_rational, rat, Rat};
use crate::{Error, Result};

/// Parameters of one caching configuration.
///
/// `lambda` access caches of `m_access` files each, one user per
/// `r`-subset of them, each user with a private cache of `m_private`
/// files, and a server library of `n_files` files of `file_bits` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemParams {
    pub lambda: u8,
    pub r: u8,
    pub n_files: u32,
    pub m_access: Rat,
    pub m_private: Rat,
    /// File size in bits; only bit-level simulation needs it.
    pub file_bits: Option<u64>,
}

impl SystemParams {
    pub fn new(lambda: u8, r: u8, n_files: u32, m_access: Rat, m_private: Rat) -> Self {
        SystemParams { lambda, r, n_files, m_access, m_private, file_bits: None }
    }

    pub fn with_file_bits(mut self, bits: u64) -> Self {
        self.file_bits = Some(bits);
        self
    }

    /// Number of users, one per r-subset of access caches.
    pub fn k_users(&self) -> u64 {
        binom(self.lambda as i64, self.r as i64)
    }

    /// Access replication factor `t_a = lambda * M_a / N`.
    pub fn t_access(&self) -> Rat {
        rat(self.lambda as i128) * self.m_access / rat(self.n_files as i128)
    }

    /// Private replication factor `t_p = K * M_p / N`.
    pub fn t_private(&self) -> Rat {
        rat(self.k_users() as i128) * self.m_private / rat(self.n_files as i128)
    }

    /// `t_a` when it is an integer in `[0, lambda]`.
    pub fn integer_t_access(&self) -> Option<u8> {
        let t = as_integer(self.t_access())?;
        if (0..=self.lambda as i128).contains(&t) {
            Some(t as u8)
        } else {
            None
        }
    }

    /// `t_p` when it is a non-negative integer.
    pub fn integer_t_private(&self) -> Option<u64> {
        let t = as_integer(self.t_private())?;
        t.to_u64()
    }

    /// Users that miss a given subfile, i.e. `C(lambda - t_a, r)`.
    pub fn wanting_users_per_subfile(&self) -> Option<u64> {
        let t = self.integer_t_access()?;
        Some(binom(self.lambda as i64 - t as i64, self.r as i64))
    }

    /// Mini-subfiles per subfile, `C(C(lambda - t_a, r), t_p)`.
    pub fn minis_per_subfile(&self) -> Option<u64> {
        let c = self.wanting_users_per_subfile()?;
        let tp = self.integer_t_private()?;
        Some(binom(c as i64, tp as i64))
    }

    /// Subpacketization `F = C(lambda, t_a) * C(C(lambda - t_a, r), t_p)`.
    ///
    /// Zero in the degenerate corner where no valid mini-subfile exists
    /// (every subfile already reachable through access caches, or `t_p`
    /// larger than the number of wanting users).
    pub fn subpacketization(&self) -> Option<u64> {
        let t = self.integer_t_access()?;
        let minis = self.minis_per_subfile()?;
        Some(binom(self.lambda as i64, t as i64) * minis)
    }

    /// Parses a plain-text config: one `key=value` per line, `#` comments.
    ///
    /// Keys: `lambda`, `r`, `n_files`, `m_access`, `m_private`,
    /// `file_bits`, `seed`. Returns the params and the optional seed.
    pub fn from_config_str(text: &str) -> Result<(SystemParams, Option<u64>)> {
        let mut fields: BTreeMap<&str, &str> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Parameter(format!("config line {}: expected key=value", lineno + 1))
            })?;
            fields.insert(key.trim(), value.trim());
        }
        let mut get = |key: &str| -> Result<&str> {
            fields
                .remove(key)
                .ok_or_else(|| Error::Parameter(format!("config is missing {key}")))
        };
        let lambda: u8 = get("lambda")?
            .parse()
            .map_err(|_| Error::Parameter("bad lambda in config".into()))?;
        let r: u8 = get("r")?.parse().map_err(|_| Error::Parameter("bad r in config".into()))?;
        let n_files: u32 = get("n_files")?
            .parse()
            .map_err(|_| Error::Parameter("bad n_files in config".into()))?;
        let m_access = parse_rational(get("m_access")?)?;
        let m_private = parse_rational(get("m_private")?)?;
        let mut params = SystemParams::new(lambda, r, n_files, m_access, m_private);
        if let Some(bits) = fields.remove("file_bits") {
            params.file_bits =
                Some(bits.parse().map_err(|_| Error::Parameter("bad file_bits in config".into()))?);
        }
        let seed = match fields.remove("seed") {
            Some(s) => Some(s.parse().map_err(|_| Error::Parameter("bad seed in config".into()))?),
            None => None,
        };
        if let Some(key) = fields.keys().next() {
            return Err(Error::Parameter(format!("unknown config key {key}")));
        }
        Ok((params, seed))
    }
}

/// A user, identified by the r-subset of access caches it reads.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(IndexSet);

impl UserId {
    pub fn new(caches: IndexSet) -> Self {
        UserId(caches)
    }

    pub fn caches(&self) -> &IndexSet {
        &self.0
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// All users in lexicographic order.
pub fn all_users(lambda: u8, r: u8) -> Vec<UserId> {
    k_subsets(&IndexSet::universe(lambda), r as usize)
        .into_iter()
        .map(UserId)
        .collect()
}

/// 1-based lexicographic rank of a user among all users.
pub fn user_rank(user: &UserId, lambda: u8) -> Result<u64> {
    rank(user.caches(), &IndexSet::universe(lambda))
}

/// The file index requested by every user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandVector(BTreeMap<UserId, u32>);

impl DemandVector {
    pub fn new(demands: BTreeMap<UserId, u32>) -> Self {
        DemandVector(demands)
    }

    pub fn file_of(&self, user: &UserId) -> Result<u32> {
        self.0
            .get(user)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("no demand recorded for user {user}")))
    }

    pub fn users(&self) -> impl Iterator<Item = &UserId> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&UserId, u32)> {
        self.0.iter().map(|(u, &n)| (u, n))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when no file is demanded twice.
    pub fn is_all_distinct(&self) -> bool {
        let mut seen: Vec<u32> = self.0.values().copied().collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }
}

/// The worst-case demand: the user of lexicographic rank `i` requests
/// file `i`, so all demands are distinct. Needs `N >= K`.
pub fn worst_case_demand(params: &SystemParams) -> Result<DemandVector> {
    let k = params.k_users();
    if (params.n_files as u64) < k {
        return Err(Error::Parameter(format!(
            "worst-case demand needs n_files >= {k}, got {}",
            params.n_files
        )));
    }
    let map = all_users(params.lambda, params.r)
        .into_iter()
        .zip(1u32..)
        .collect();
    Ok(DemandVector(map))
}

/// Fraction of each file's mini-subfiles a single user can read from its
/// access and private caches: `1 - (C(lambda - t_a, r) - t_p) / C(lambda, r)`.
pub fn accessible_fraction(params: &SystemParams) -> Result<Rat> {
    let t_a = params
        .integer_t_access()
        .ok_or_else(|| Error::Parameter(format!("t_a = {} is not an integer", params.t_access())))?;
    let t_p = params
        .integer_t_private()
        .ok_or_else(|| Error::Parameter(format!("t_p = {} is not an integer", params.t_private())))?;
    let c = binom(params.lambda as i64 - t_a as i64, params.r as i64);
    if c == 0 {
        // every subfile reaches every user through the access caches
        return Ok(rat(1));
    }
    if t_p > c {
        return Err(Error::Parameter(format!(
            "t_p = {t_p} exceeds the {c} users wanting each subfile"
        )));
    }
    Ok(rat(1) - rat((c - t_p) as i128) / rat(params.k_users() as i128))
}

/// Outcome of checking one parameter set.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub t_access: Rat,
    pub t_private: Rat,
    pub k_users: u64,
    pub t_access_integer: bool,
    pub t_private_integer: bool,
    pub subpacketization: Option<u64>,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "t_access={} ({}) t_private={} ({}) k_users={}",
            self.t_access,
            if self.t_access_integer { "integer" } else { "fractional" },
            self.t_private,
            if self.t_private_integer { "integer" } else { "fractional" },
            self.k_users,
        )?;
        match self.subpacketization {
            Some(fp) => writeln!(f, "subpacketization={fp}")?,
            None => writeln!(f, "subpacketization=n/a (fractional replication)")?,
        }
        for v in &self.violations {
            writeln!(f, "violation: {v}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

/// Checks every structural constraint and reports derived quantities.
pub fn validate(params: &SystemParams) -> ValidationReport {
    let mut violations = Vec::new();
    let mut notes = Vec::new();
    if binom_checked(params.lambda as i64, params.r as i64).is_err() {
        return ValidationReport {
            t_access: rat(0),
            t_private: rat(0),
            k_users: 0,
            t_access_integer: false,
            t_private_integer: false,
            subpacketization: None,
            violations: vec![format!(
                "user count C({}, {}) is not representable",
                params.lambda, params.r
            )],
            notes,
        };
    }
    let k = params.k_users();
    let n = rat(params.n_files as i128);

    if params.r < 1 || params.r > params.lambda {
        violations.push(format!(
            "access degree r={} outside [1, {}]",
            params.r, params.lambda
        ));
    }
    if (params.n_files as u64) < k {
        violations.push(format!("n_files={} below k_users={k}", params.n_files));
    }
    if params.m_access.is_negative() || params.m_access > n {
        violations.push(format!("m_access={} outside [0, N]", params.m_access));
    }
    if params.m_private.is_negative() || params.m_private > n {
        violations.push(format!("m_private={} outside [0, N]", params.m_private));
    }
    if params.m_access + params.m_private >= n {
        violations.push(format!(
            "m_access + m_private = {} is not below N = {}",
            params.m_access + params.m_private,
            params.n_files
        ));
    }

    let t_access = params.t_access();
    let t_private = params.t_private();
    if t_access.is_negative() || t_access > rat(params.lambda as i128) {
        violations.push(format!("t_access={t_access} outside [0, lambda]"));
    }

    if let (Some(t_a), Some(t_p)) = (params.integer_t_access(), params.integer_t_private()) {
        let c = binom(params.lambda as i64 - t_a as i64, params.r as i64);
        if c == 0 && t_p > 0 {
            notes.push(
                "all subfiles reachable through access caches; private caches stay empty".into(),
            );
        } else if t_p > c {
            violations.push(format!(
                "t_private={t_p} exceeds the {c} users wanting each subfile"
            ));
        }
    }
    if let Some(bits) = params.file_bits {
        match params.subpacketization() {
            Some(fp) if fp > 0 && bits % fp != 0 => {
                violations.push(format!("file_bits={bits} not divisible by subpacketization={fp}"))
            }
            _ => {}
        }
    }

    ValidationReport {
        t_access,
        t_private,
        k_users: k,
        t_access_integer: params.integer_t_access().is_some(),
        t_private_integer: params.integer_t_private().is_some(),
        subpacketization: params.subpacketization(),
        violations,
        notes,
    }
}
