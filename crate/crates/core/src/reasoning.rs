//! Universal and application rules, plus default reasoning over claims.
//!
//! Two products whose ports share an interface are assumed to fit unless a
//! claim says otherwise. Claims are ranked by justification level; a claim
//! naming both products directly outranks one that reaches them through a
//! series, and a mediator-conditioned claim refines a blanket one of equal
//! rank. Equal rank with opposite polarity is a conflict and blocks use.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{
    Catalog, CompatibilityClaim, Diagnostic, DiagnosticCode, JustificationLevel, Orientation, Polarity,
    ResolvedProduct, Scope,
};

pub const ROBOTIC_ARM: &str = "robotic_arm";
pub const EECD: &str = "eecd";
pub const END_EFFECTOR: &str = "end_effector";
pub const DATA_CONNECTION: &str = "data_connection";
pub const FLANGE_ADAPTER: &str = "flange_adapter";

/// Required-port class that every robotic arm must satisfy.
pub const ROBOT_FLANGE_CLASS: &str = "robot_flange";

/// Sizes of configuration the application rules define.
pub const SUPPORTED_SIZES: [usize; 2] = [4, 5];

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReasoningError {
    #[error("unknown product `{0}`")]
    UnknownProduct(String),
    #[error("unknown port `{port}` on product `{product}`")]
    UnknownPort { product: String, port: String },
    #[error("unknown application `{0}`")]
    UnknownApplication(String),
    #[error("configuration size {0} is not supported (expected 4 or 5)")]
    InvalidSize(usize),
    #[error("compatibility of `{0}` with itself is undefined")]
    SameProduct(String),
}

/// A port on a product. Serialized as `["product", "port"]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(String, String)", into = "(String, String)")]
pub struct PortRef {
    pub product: String,
    pub port: String,
}

impl PortRef {
    pub fn new(product: impl Into<String>, port: impl Into<String>) -> Self {
        Self {
            product: product.into(),
            port: port.into(),
        }
    }
}

impl From<(String, String)> for PortRef {
    fn from((product, port): (String, String)) -> Self {
        Self { product, port }
    }
}

impl From<PortRef> for (String, String) {
    fn from(p: PortRef) -> Self {
        (p.product, p.port)
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.product, self.port)
    }
}

/// One matched pair of ports. Serialized as `[[p, port], [q, port]]`.
///
/// The solver always emits the output side first.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(PortRef, PortRef)", into = "(PortRef, PortRef)")]
pub struct Connection {
    pub a: PortRef,
    pub b: PortRef,
}

impl Connection {
    pub fn new(a: PortRef, b: PortRef) -> Self {
        Self { a, b }
    }
}

impl From<(PortRef, PortRef)> for Connection {
    fn from((a, b): (PortRef, PortRef)) -> Self {
        Self { a, b }
    }
}

impl From<Connection> for (PortRef, PortRef) {
    fn from(c: Connection) -> Self {
        (c.a, c.b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "mediator")]
pub enum VerdictStatus {
    CompatibleByDefault,
    CompatibleByEvidence,
    Incompatible,
    /// Usable only when the named product sits on a route between the pair.
    ConditionallyIncompatible(String),
    Conflict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompatibilityVerdict {
    pub status: VerdictStatus,
    /// Claims behind the status, strongest first. Empty for the default.
    pub supporting_claims: Vec<CompatibilityClaim>,
    pub strength: Option<JustificationLevel>,
}

impl CompatibilityVerdict {
    fn by_default() -> Self {
        Self {
            status: VerdictStatus::CompatibleByDefault,
            supporting_claims: Vec::new(),
            strength: None,
        }
    }

    /// Compatible outright, by default or by evidence.
    pub fn permits(&self) -> bool {
        matches!(
            self.status,
            VerdictStatus::CompatibleByDefault | VerdictStatus::CompatibleByEvidence
        )
    }

    pub fn mediator(&self) -> Option<&str> {
        match &self.status {
            VerdictStatus::ConditionallyIncompatible(m) => Some(m),
            _ => None,
        }
    }
}

/// Rank of a claim: justification level, then how many subjects are named
/// as products rather than series.
type Rank = (JustificationLevel, u8);

fn claim_applies(claim: &CompatibilityClaim, a: &ResolvedProduct, b: &ResolvedProduct) -> bool {
    let [s, t] = &claim.subjects;
    (a.is_designated_by(s) && b.is_designated_by(t)) || (a.is_designated_by(t) && b.is_designated_by(s))
}

fn claim_in_scope(claim: &CompatibilityClaim, scope: Scope) -> bool {
    match scope {
        Scope::Configuration => claim.scope == Scope::Configuration,
        Scope::Direct => {
            claim.scope == Scope::Direct
                || (claim.scope == Scope::Configuration && claim.polarity == Polarity::Incompatible)
        }
    }
}

fn claim_rank(catalog: &Catalog, claim: &CompatibilityClaim) -> Rank {
    let named = claim.subjects.iter().filter(|s| catalog.product(s).is_some()).count() as u8;
    (claim.justification.level, named)
}

/// Ranked evidence on one pair, without the decision applied yet.
fn collect_claims<'c>(
    catalog: &'c Catalog,
    a: &ResolvedProduct,
    b: &ResolvedProduct,
    scope: Scope,
) -> Vec<(Rank, &'c CompatibilityClaim)> {
    let mut claims: Vec<_> = catalog
        .claims()
        .iter()
        .filter(|c| claim_in_scope(c, scope) && claim_applies(c, a, b))
        .map(|c| (claim_rank(catalog, c), c))
        .collect();
    // strongest first; ties keep catalog order
    claims.sort_by_key(|c| std::cmp::Reverse(c.0));
    claims
}

/// Decides whether two products may be connected (`Scope::Direct`) or may
/// coexist in one configuration (`Scope::Configuration`).
///
/// Symmetric in `a` and `b`.
pub fn resolve_compatibility(
    catalog: &Catalog,
    a: &str,
    b: &str,
    scope: Scope,
) -> Result<CompatibilityVerdict, ReasoningError> {
    let pa = catalog
        .product(a)
        .ok_or_else(|| ReasoningError::UnknownProduct(a.to_string()))?;
    let pb = catalog
        .product(b)
        .ok_or_else(|| ReasoningError::UnknownProduct(b.to_string()))?;
    if a == b {
        return Err(ReasoningError::SameProduct(a.to_string()));
    }

    let claims = collect_claims(catalog, pa, pb, scope);
    if claims.is_empty() {
        return Ok(CompatibilityVerdict::by_default());
    }

    // A mediator condition restricts the pair whatever its polarity says:
    // "compatible only via M" and "incompatible unless via M" coincide.
    let restrictive = |c: &CompatibilityClaim| c.polarity == Polarity::Incompatible || c.condition.is_some();
    let (open, closed): (Vec<_>, Vec<_>) = claims.into_iter().partition(|(_, c)| !restrictive(c));
    let best_open = open.first().map(|(r, _)| *r);
    let best_closed = closed.first().map(|(r, _)| *r);

    let strength = |side: &[(Rank, &CompatibilityClaim)]| side.first().map(|(r, _)| r.0);
    let owned = |side: &[(Rank, &CompatibilityClaim)]| side.iter().map(|(_, c)| (*c).clone()).collect();

    let verdict = match (best_open, best_closed) {
        (None, None) => unreachable!("claims is non-empty"),
        (Some(o), c) if c.is_none_or(|c| o > c) => CompatibilityVerdict {
            status: VerdictStatus::CompatibleByEvidence,
            supporting_claims: owned(&open),
            strength: strength(&open),
        },
        (o, Some(c)) if o.is_none_or(|o| c > o) => {
            let top: Vec<_> = closed.iter().filter(|(r, _)| *r == c).map(|(_, cl)| *cl).collect();
            let mediator = top.iter().filter_map(|cl| cl.mediator()).min();
            let status = match mediator {
                Some(m) => VerdictStatus::ConditionallyIncompatible(m.to_string()),
                None => VerdictStatus::Incompatible,
            };
            CompatibilityVerdict {
                status,
                supporting_claims: owned(&closed),
                strength: strength(&closed),
            }
        }
        (Some(o), Some(_)) => {
            let supporting = open
                .iter()
                .chain(closed.iter())
                .filter(|(r, _)| *r == o)
                .map(|(_, c)| (*c).clone())
                .collect();
            CompatibilityVerdict {
                status: VerdictStatus::Conflict,
                supporting_claims: supporting,
                strength: Some(o.0),
            }
        }
        _ => unreachable!(),
    };
    Ok(verdict)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectionCheck {
    pub port_a: PortRef,
    pub port_b: PortRef,
    pub verdict: CompatibilityVerdict,
    /// Distinct ports on distinct products, opposite orientation, same type.
    pub structural_ok: bool,
}

impl ConnectionCheck {
    /// The connection may be made without further conditions.
    pub fn is_allowed(&self) -> bool {
        self.structural_ok && self.verdict.permits()
    }

    /// Allowed, or allowed once the verdict's mediator is routed in.
    pub fn is_admissible(&self) -> bool {
        self.structural_ok && (self.verdict.permits() || self.verdict.mediator().is_some())
    }
}

fn lookup_port<'c>(
    catalog: &'c Catalog,
    r: &PortRef,
) -> Result<(&'c ResolvedProduct, &'c crate::catalog::Port), ReasoningError> {
    let product = catalog
        .product(&r.product)
        .ok_or_else(|| ReasoningError::UnknownProduct(r.product.clone()))?;
    let port = product.port(&r.port).ok_or_else(|| ReasoningError::UnknownPort {
        product: r.product.clone(),
        port: r.port.clone(),
    })?;
    Ok((product, port))
}

/// Checks one port pair against the port rules and the pair's direct verdict.
pub fn check_port_connection(catalog: &Catalog, pa: &PortRef, pb: &PortRef) -> Result<ConnectionCheck, ReasoningError> {
    let (prod_a, port_a) = lookup_port(catalog, pa)?;
    let (prod_b, port_b) = lookup_port(catalog, pb)?;

    if prod_a.id == prod_b.id {
        // also covers a port paired with itself; no pair verdict exists
        return Ok(ConnectionCheck {
            port_a: pa.clone(),
            port_b: pb.clone(),
            verdict: CompatibilityVerdict::by_default(),
            structural_ok: false,
        });
    }
    let structural_ok =
        port_a.orientation == port_b.orientation.opposite() && port_a.port_type.value == port_b.port_type.value;
    let verdict = resolve_compatibility(catalog, &prod_a.id, &prod_b.id, Scope::Direct)?;
    Ok(ConnectionCheck {
        port_a: pa.clone(),
        port_b: pb.clone(),
        verdict,
        structural_ok,
    })
}

/// Requires a product of `product_type` to carry `name` = `value`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeRequirement {
    pub product_type: String,
    pub name: String,
    pub value: String,
}

/// What a user asks the configurator for.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryRequirements {
    pub application: String,
    pub size_k: usize,
    pub min_justification: Option<JustificationLevel>,
    #[serde(default)]
    pub extra_required_attributes: Vec<AttributeRequirement>,
}

impl QueryRequirements {
    pub fn new(application: impl Into<String>, size_k: usize) -> Result<Self, ReasoningError> {
        if !SUPPORTED_SIZES.contains(&size_k) {
            return Err(ReasoningError::InvalidSize(size_k));
        }
        Ok(Self {
            application: application.into(),
            size_k,
            min_justification: None,
            extra_required_attributes: Vec::new(),
        })
    }

    pub fn with_min_justification(mut self, level: Option<JustificationLevel>) -> Self {
        self.min_justification = level;
        self
    }

    pub fn with_requirement(mut self, req: AttributeRequirement) -> Self {
        self.extra_required_attributes.push(req);
        self
    }

    /// Checks the size and that the application exists in `catalog`.
    pub fn validate<'c>(&self, catalog: &'c Catalog) -> Result<&'c crate::catalog::ApplicationSpec, ReasoningError> {
        if !SUPPORTED_SIZES.contains(&self.size_k) {
            return Err(ReasoningError::InvalidSize(self.size_k));
        }
        catalog
            .application(&self.application)
            .ok_or_else(|| ReasoningError::UnknownApplication(self.application.clone()))
    }

    /// Product types, in canonical role order, a configuration of this size holds.
    pub fn roles(&self) -> &'static [&'static str] {
        if self.size_k == 5 {
            &[ROBOTIC_ARM, FLANGE_ADAPTER, EECD, END_EFFECTOR, DATA_CONNECTION]
        } else {
            &[ROBOTIC_ARM, EECD, END_EFFECTOR, DATA_CONNECTION]
        }
    }
}

/// Weakest evidence a configuration rests on. `Default` sits below every
/// justification level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Certainty {
    Default,
    Observation,
    Secondary,
    Empirical,
    Primary,
}

impl Certainty {
    pub fn as_str(self) -> &'static str {
        match self {
            Certainty::Default => "default",
            Certainty::Observation => "observation",
            Certainty::Secondary => "secondary",
            Certainty::Empirical => "empirical",
            Certainty::Primary => "primary",
        }
    }

    pub fn meets(self, threshold: Option<JustificationLevel>) -> bool {
        threshold.is_none_or(|t| self >= Certainty::from(t))
    }
}

impl From<JustificationLevel> for Certainty {
    fn from(l: JustificationLevel) -> Self {
        match l {
            JustificationLevel::Observation => Certainty::Observation,
            JustificationLevel::Secondary => Certainty::Secondary,
            JustificationLevel::Empirical => Certainty::Empirical,
            JustificationLevel::Primary => Certainty::Primary,
        }
    }
}

impl From<Option<JustificationLevel>> for Certainty {
    fn from(l: Option<JustificationLevel>) -> Self {
        l.map_or(Certainty::Default, Certainty::from)
    }
}

impl fmt::Display for Certainty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    SizeMismatch,
    DuplicateProduct,
    ForeignPort,
    PortUnmatched,
    PortReused,
    /// Self-connection, same product, same orientation or different interface.
    PortMismatch,
    DirectIncompatibility,
    DirectConflict,
    MediatorNotOnPath,
    CoexistenceIncompatibility,
    CoexistenceConflict,
    RoleCount,
    FlangeAdapterPlacement,
    ApplicationSubtype,
    ExtraRequirement,
    BelowThreshold,
    DefaultBelowThreshold,
    Disconnected,
}

/// One reason a configuration is not valid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: Rule,
    pub subjects: Vec<String>,
    pub message: String,
}

impl Violation {
    fn new(rule: Rule, subjects: Vec<String>, message: impl Into<String>) -> Self {
        Self {
            rule,
            subjects,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} [{}]: {}", self.rule, self.subjects.join(", "), self.message)
    }
}

type Adjacency<'a> = BTreeMap<&'a str, BTreeSet<&'a str>>;

/// True if some simple path from `from` to `to` passes through `via`.
pub(crate) fn on_some_path(adj: &Adjacency<'_>, from: &str, to: &str, via: &str) -> bool {
    fn walk<'a>(
        adj: &Adjacency<'a>,
        at: &'a str,
        to: &str,
        via: &str,
        seen_via: bool,
        visited: &mut Vec<&'a str>,
    ) -> bool {
        if at == to {
            return seen_via;
        }
        let Some(next) = adj.get(at) else { return false };
        for &n in next {
            if visited.contains(&n) {
                continue;
            }
            visited.push(n);
            let found = walk(adj, n, to, via, seen_via || n == via, visited);
            visited.pop();
            if found {
                return true;
            }
        }
        false
    }
    if via == from || via == to {
        return false;
    }
    let Some((&start, _)) = adj.get_key_value(from) else {
        return false;
    };
    walk(adj, start, to, via, false, &mut vec![start])
}

/// Lists every rule the configuration breaks; empty means valid.
///
/// `products` and `matching` are taken as given; order does not matter.
pub fn check_configuration(
    catalog: &Catalog,
    products: &[String],
    matching: &[Connection],
    req: &QueryRequirements,
) -> Result<Vec<Violation>, ReasoningError> {
    let application = req.validate(catalog)?;
    let resolved: Vec<&ResolvedProduct> = products
        .iter()
        .map(|id| {
            catalog
                .product(id)
                .ok_or_else(|| ReasoningError::UnknownProduct(id.clone()))
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();

    if products.len() != req.size_k {
        out.push(Violation::new(
            Rule::SizeMismatch,
            products.to_vec(),
            format!(
                "configuration has {} products, query asks for {}",
                products.len(),
                req.size_k
            ),
        ));
    }
    let members: BTreeSet<&str> = products.iter().map(String::as_str).collect();
    if members.len() != products.len() {
        out.push(Violation::new(
            Rule::DuplicateProduct,
            products.to_vec(),
            "a product is listed more than once",
        ));
    }

    // port usage: every port of every member exactly once
    let mut usage: HashMap<&PortRef, usize> = HashMap::new();
    let mut checks = Vec::with_capacity(matching.len());
    for conn in matching {
        for end in [&conn.a, &conn.b] {
            lookup_port(catalog, end)?;
            *usage.entry(end).or_default() += 1;
            if !members.contains(end.product.as_str()) {
                out.push(Violation::new(
                    Rule::ForeignPort,
                    vec![end.product.clone()],
                    format!("port {end} belongs to a product outside the configuration"),
                ));
            }
        }
        checks.push(check_port_connection(catalog, &conn.a, &conn.b)?);
    }
    for p in &resolved {
        for port in p.ports() {
            let r = PortRef::new(p.id.clone(), port.id.clone());
            match usage.get(&r).copied().unwrap_or(0) {
                1 => {}
                0 => out.push(Violation::new(
                    Rule::PortUnmatched,
                    vec![p.id.clone()],
                    format!("port {r} is not connected"),
                )),
                n => out.push(Violation::new(
                    Rule::PortReused,
                    vec![p.id.clone()],
                    format!("port {r} is used by {n} connections"),
                )),
            }
        }
    }

    let mut adj: Adjacency<'_> = BTreeMap::new();
    for p in &members {
        adj.entry(p).or_default();
    }
    for conn in matching {
        let (a, b) = (conn.a.product.as_str(), conn.b.product.as_str());
        if a != b && members.contains(a) && members.contains(b) {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
    }

    // connection rules and evidence threshold
    for check in &checks {
        let pair = vec![check.port_a.product.clone(), check.port_b.product.clone()];
        let label = format!("{} -> {}", check.port_a, check.port_b);
        if !check.structural_ok {
            out.push(Violation::new(
                Rule::PortMismatch,
                pair,
                format!("{label}: ports need distinct products, opposite orientations and the same interface"),
            ));
            continue;
        }
        match &check.verdict.status {
            VerdictStatus::Incompatible => {
                out.push(Violation::new(
                    Rule::DirectIncompatibility,
                    pair,
                    format!("{label}: products are known to be incompatible as neighbours"),
                ));
                continue;
            }
            VerdictStatus::Conflict => {
                out.push(Violation::new(
                    Rule::DirectConflict,
                    pair,
                    format!("{label}: evidence of equal strength contradicts itself"),
                ));
                continue;
            }
            VerdictStatus::ConditionallyIncompatible(m) => {
                if !members.contains(m.as_str()) || !on_some_path(&adj, &check.port_a.product, &check.port_b.product, m)
                {
                    out.push(Violation::new(
                        Rule::MediatorNotOnPath,
                        pair,
                        format!("{label}: only valid when routed through `{m}`"),
                    ));
                    continue;
                }
            }
            VerdictStatus::CompatibleByDefault | VerdictStatus::CompatibleByEvidence => {}
        }
        if let Some(threshold) = req.min_justification {
            match check.verdict.strength {
                None => out.push(Violation::new(
                    Rule::DefaultBelowThreshold,
                    pair,
                    format!("{label}: rests on the default assumption, {threshold} evidence required"),
                )),
                Some(s) if s < threshold => out.push(Violation::new(
                    Rule::BelowThreshold,
                    pair,
                    format!("{label}: strongest evidence is {s}, {threshold} required"),
                )),
                Some(_) => {}
            }
        }
    }

    // coexistence
    for (i, a) in resolved.iter().enumerate() {
        for b in &resolved[i + 1..] {
            if a.id == b.id {
                continue;
            }
            let v = resolve_compatibility(catalog, &a.id, &b.id, Scope::Configuration)?;
            let pair = vec![a.id.clone(), b.id.clone()];
            match v.status {
                VerdictStatus::Incompatible => out.push(Violation::new(
                    Rule::CoexistenceIncompatibility,
                    pair,
                    format!("`{}` and `{}` must not be in the same configuration", a.id, b.id),
                )),
                VerdictStatus::Conflict => out.push(Violation::new(
                    Rule::CoexistenceConflict,
                    pair,
                    format!("contradicting evidence on `{}` and `{}` coexisting", a.id, b.id),
                )),
                _ => {}
            }
        }
    }

    // roles
    let mut by_type: BTreeMap<&str, Vec<&ResolvedProduct>> = BTreeMap::new();
    for p in &resolved {
        by_type.entry(p.product_type().unwrap_or("")).or_default().push(p);
    }
    let roles = req.roles();
    for role in roles {
        let n = by_type.get(role).map_or(0, Vec::len);
        if n != 1 {
            out.push(Violation::new(
                Rule::RoleCount,
                by_type
                    .get(role)
                    .map_or_else(Vec::new, |v| v.iter().map(|p| p.id.clone()).collect()),
                format!("exactly one {role} required, found {n}"),
            ));
        }
    }
    for (ty, ps) in &by_type {
        if !roles.contains(ty) {
            out.push(Violation::new(
                Rule::RoleCount,
                ps.iter().map(|p| p.id.clone()).collect(),
                format!(
                    "product type `{ty}` has no role in a {}-product configuration",
                    req.size_k
                ),
            ));
        }
    }
    if req.size_k == 5 {
        let one = |ty: &str| by_type.get(ty).filter(|v| v.len() == 1).map(|v| v[0].id.as_str());
        if let (Some(adapter), Some(arm), Some(eecd)) = (one(FLANGE_ADAPTER), one(ROBOTIC_ARM), one(EECD)) {
            let next = &adj[adapter];
            if !next.contains(arm) || !next.contains(eecd) {
                out.push(Violation::new(
                    Rule::FlangeAdapterPlacement,
                    vec![adapter.to_string(), arm.to_string(), eecd.to_string()],
                    "the flange adapter must connect the robotic arm to the EECD",
                ));
            }
        }
    }

    // application and user requirements
    if let Some(subtype) = &application.end_effector_subtype {
        for ee in by_type.get(END_EFFECTOR).into_iter().flatten() {
            if ee.attribute_value("subtype") != Some(subtype.as_str()) {
                out.push(Violation::new(
                    Rule::ApplicationSubtype,
                    vec![ee.id.clone()],
                    format!(
                        "application `{}` needs a {subtype} end effector, `{}` is {}",
                        application.name,
                        ee.id,
                        ee.attribute_value("subtype").unwrap_or("untyped")
                    ),
                ));
            }
        }
    }
    for extra in &req.extra_required_attributes {
        let holders = by_type.get(extra.product_type.as_str()).map_or(&[][..], Vec::as_slice);
        if !holders
            .iter()
            .any(|p| p.attribute_value(&extra.name) == Some(extra.value.as_str()))
        {
            out.push(Violation::new(
                Rule::ExtraRequirement,
                holders.iter().map(|p| p.id.clone()).collect(),
                format!("no {} with {} = {}", extra.product_type, extra.name, extra.value),
            ));
        }
    }

    // connectivity
    if let Some(&start) = members.iter().next() {
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(at) = stack.pop() {
            for &n in &adj[at] {
                if seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        if seen.len() != members.len() {
            out.push(Violation::new(
                Rule::Disconnected,
                members.difference(&seen).map(|s| s.to_string()).collect(),
                "products are not all connected to each other",
            ));
        }
    }

    Ok(out)
}

fn flange_like(port_type: &str) -> bool {
    let lower = port_type.to_ascii_lowercase();
    lower
        .find("robot")
        .is_some_and(|i| lower[i + "robot".len()..].contains("flange"))
}

/// Required-port classes applying to a product type, with their explicit
/// members. The robot flange class is always present for arms.
fn port_classes<'c>(catalog: &'c Catalog, product_type: &str) -> BTreeMap<&'c str, BTreeSet<&'c str>> {
    let mut classes: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    if product_type == ROBOTIC_ARM {
        classes.entry(ROBOT_FLANGE_CLASS).or_default();
    }
    for rule in catalog.port_rules() {
        if rule.product_type == product_type {
            classes
                .entry(rule.port_type_class.as_str())
                .or_default()
                .extend(rule.members.iter().map(String::as_str));
        }
    }
    classes
}

/// Reports required port classes the product does not provide.
pub fn required_ports_check(catalog: &Catalog, product: &ResolvedProduct) -> Vec<Diagnostic> {
    let Some(ty) = product.product_type() else {
        return Vec::new();
    };
    port_classes(catalog, ty)
        .into_iter()
        .filter(|(class, members)| {
            !product.ports().any(|p| {
                let v = p.port_type.value.as_str();
                members.contains(v) || (*class == ROBOT_FLANGE_CLASS && flange_like(v))
            })
        })
        .map(|(class, _)| {
            Diagnostic::new(
                DiagnosticCode::MissingRequiredPort,
                &product.id,
                format!("a {ty} must have a port of class `{class}`"),
            )
        })
        .collect()
}

/// True if the two ports could be matched at all, ignoring claims.
pub(crate) fn structurally_matches(a: &crate::catalog::Port, b: &crate::catalog::Port) -> bool {
    a.orientation == b.orientation.opposite() && a.port_type.value == b.port_type.value
}

pub(crate) fn output_first<'a>(
    a: (&'a str, &'a crate::catalog::Port),
    b: (&'a str, &'a crate::catalog::Port),
) -> Connection {
    let (out, inp) = if a.1.orientation == Orientation::Output {
        (a, b)
    } else {
        (b, a)
    };
    Connection::new(PortRef::new(out.0, &out.1.id), PortRef::new(inp.0, &inp.1.id))
}
