//! Enumeration of valid configurations.
//!
//! [`enumerate_configurations`] walks role slots in canonical order (arm,
//! flange adapter, EECD, end effector, data connection), pruning on
//! coexistence claims and on port-type balance, then enumerates the total
//! port matchings of each surviving product set. [`enumerate_bruteforce`]
//! tries every subset and every pairing and keeps what
//! [`check_configuration`] accepts; it exists to cross-check the former.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::catalog::{Catalog, CompatibilityClaim, JustificationLevel, Orientation, Port, ResolvedProduct, Scope};
use crate::reasoning::{
    check_configuration, output_first, resolve_compatibility, structurally_matches, Certainty, CompatibilityVerdict,
    Connection, PortRef, QueryRequirements, ReasoningError, VerdictStatus, END_EFFECTOR,
};

/// Largest catalog the brute-force oracle accepts.
pub const BRUTEFORCE_MAX_PRODUCTS: usize = 14;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid query: {0}")]
    InvalidQuery(#[from] ReasoningError),
    #[error("catalog has {products} products; brute force is limited to {max}")]
    CatalogTooLarge { products: usize, max: usize },
    #[error("configuration was produced from a different catalog")]
    StaleConfiguration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceBasis {
    /// Same interface and no contrary evidence.
    Default,
    /// Backed by compatible claims.
    Claim,
    /// Allowed only because the named mediator is routed in.
    Mediated,
}

/// Why one connection of a configuration is allowed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConnectionExplanation {
    pub connection: Connection,
    pub port_type: String,
    pub basis: EvidenceBasis,
    /// Strongest claim behind the connection, if any.
    pub claim: Option<CompatibilityClaim>,
    pub mediator: Option<String>,
    pub certainty: Certainty,
    pub summary: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Configuration {
    /// Canonical role order: arm, [flange adapter], EECD, end effector, data connection.
    pub products: Vec<String>,
    /// Output side first, sorted.
    pub matching: Vec<Connection>,
    pub certainty: Certainty,
    pub explanations: Vec<ConnectionExplanation>,
    #[serde(skip)]
    catalog_fingerprint: String,
}

impl Configuration {
    fn sort_key(&self) -> (&[String], &[Connection]) {
        (&self.products, &self.matching)
    }
}

fn describe_connection(catalog: &Catalog, conn: &Connection, verdict: &CompatibilityVerdict) -> ConnectionExplanation {
    let port_type = catalog
        .product(&conn.a.product)
        .and_then(|p| p.port(&conn.a.port))
        .map(|p| p.port_type.value.clone())
        .unwrap_or_default();
    let claim = verdict.supporting_claims.first().cloned();
    let certainty = Certainty::from(verdict.strength);
    let (basis, mediator, summary) = match &verdict.status {
        VerdictStatus::ConditionallyIncompatible(m) => {
            let name = catalog.product(m).map_or(m.as_str(), |p| p.display_name.as_str());
            let source = claim.as_ref().map_or(String::new(), |c| {
                format!(" ({}: {})", c.justification.level, c.justification.source)
            });
            (
                EvidenceBasis::Mediated,
                Some(m.clone()),
                format!("allowed only when routed through data connection `{m}` ({name}){source}"),
            )
        }
        VerdictStatus::CompatibleByEvidence => {
            let c = claim.as_ref().expect("evidence verdict has a claim");
            (
                EvidenceBasis::Claim,
                None,
                format!(
                    "compatible per {} evidence: {}",
                    c.justification.level, c.justification.source
                ),
            )
        }
        _ => (
            EvidenceBasis::Default,
            None,
            "default assumption: same interface, no contrary evidence".to_string(),
        ),
    };
    ConnectionExplanation {
        connection: conn.clone(),
        port_type,
        basis,
        claim,
        mediator,
        certainty,
        summary,
    }
}

fn role_index(req: &QueryRequirements, p: &ResolvedProduct) -> usize {
    let ty = p.product_type().unwrap_or("");
    req.roles().iter().position(|r| *r == ty).unwrap_or(usize::MAX)
}

/// Puts an accepted product set and matching into canonical form.
fn assemble(
    catalog: &Catalog,
    req: &QueryRequirements,
    products: &[&ResolvedProduct],
    matching: Vec<Connection>,
    verdicts: &mut VerdictCache<'_>,
) -> Configuration {
    let mut ordered: Vec<&ResolvedProduct> = products.to_vec();
    ordered.sort_by(|a, b| (role_index(req, a), &a.id).cmp(&(role_index(req, b), &b.id)));
    let mut matching = matching;
    matching.sort();
    let explanations: Vec<_> = matching
        .iter()
        .map(|conn| {
            let v = verdicts.direct(&conn.a.product, &conn.b.product);
            describe_connection(catalog, conn, &v)
        })
        .collect();
    let certainty = explanations
        .iter()
        .map(|e| e.certainty)
        .min()
        .unwrap_or(Certainty::Default);
    Configuration {
        products: ordered.iter().map(|p| p.id.clone()).collect(),
        matching,
        certainty,
        explanations,
        catalog_fingerprint: catalog.fingerprint().to_string(),
    }
}

/// Memoized pair verdicts; the catalog is immutable so answers never change.
struct VerdictCache<'c> {
    catalog: &'c Catalog,
    direct: HashMap<(String, String), CompatibilityVerdict>,
    coexist: HashMap<(String, String), CompatibilityVerdict>,
}

impl<'c> VerdictCache<'c> {
    fn new(catalog: &'c Catalog) -> Self {
        Self {
            catalog,
            direct: HashMap::new(),
            coexist: HashMap::new(),
        }
    }

    fn lookup(&mut self, a: &str, b: &str, scope: Scope) -> CompatibilityVerdict {
        let key = if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        };
        let catalog = self.catalog;
        let map = match scope {
            Scope::Direct => &mut self.direct,
            Scope::Configuration => &mut self.coexist,
        };
        map.entry(key)
            .or_insert_with(|| resolve_compatibility(catalog, a, b, scope).expect("products come from the catalog"))
            .clone()
    }

    fn direct(&mut self, a: &str, b: &str) -> CompatibilityVerdict {
        self.lookup(a, b, Scope::Direct)
    }

    fn coexist(&mut self, a: &str, b: &str) -> CompatibilityVerdict {
        self.lookup(a, b, Scope::Configuration)
    }
}

/// Per port type: (outputs, inputs).
type Balance<'a> = BTreeMap<&'a str, (i64, i64)>;

fn balance_of<'a>(products: &[&'a ResolvedProduct]) -> Balance<'a> {
    let mut b: Balance<'a> = BTreeMap::new();
    for p in products {
        for port in p.ports() {
            let e = b.entry(port.port_type.value.as_str()).or_default();
            match port.orientation {
                Orientation::Output => e.0 += 1,
                Orientation::Input => e.1 += 1,
            }
        }
    }
    b
}

/// Max (outputs, inputs) per port type any single candidate can contribute.
fn supply_of<'a>(candidates: &[&'a ResolvedProduct]) -> Balance<'a> {
    let mut best: Balance<'a> = BTreeMap::new();
    for c in candidates {
        for (ty, (o, i)) in balance_of(&[c]) {
            let e = best.entry(ty).or_default();
            e.0 = e.0.max(o);
            e.1 = e.1.max(i);
        }
    }
    best
}

/// Whether the remaining role slots could still even out every port type.
fn balance_feasible(chosen: &[&ResolvedProduct], remaining_supply: &[Balance<'_>]) -> bool {
    let mut slack: BTreeMap<&str, (i64, i64)> = BTreeMap::new();
    for supply in remaining_supply {
        for (ty, (o, i)) in supply {
            let e = slack.entry(ty).or_default();
            e.0 += o;
            e.1 += i;
        }
    }
    balance_of(chosen).into_iter().all(|(ty, (o, i))| {
        let (extra_out, extra_in) = slack.get(ty).copied().unwrap_or((0, 0));
        o - i <= extra_in && i - o <= extra_out
    })
}

/// Whether `via` can be placed on a simple path between `from` and `to`:
/// two paths from `via`, one to each end, sharing no other vertex. Decided
/// as a unit-capacity vertex-split max flow.
fn routes_through(adj: &BTreeMap<&str, BTreeSet<&str>>, from: &str, to: &str, via: &str) -> bool {
    if via == from || via == to {
        return false;
    }
    let names: Vec<&str> = adj.keys().copied().collect();
    let idx = |n: &str| names.iter().position(|m| *m == n);
    let (Some(f), Some(t), Some(v)) = (idx(from), idx(to), idx(via)) else {
        return false;
    };
    let n = names.len();
    // node i splits into in = 2i, out = 2i+1; sink = 2n
    let size = 2 * n + 1;
    let sink = 2 * n;
    let mut cap = vec![vec![0i32; size]; size];
    for i in 0..n {
        cap[2 * i][2 * i + 1] = 1;
        for nb in &adj[names[i]] {
            if let Some(j) = idx(nb) {
                cap[2 * i + 1][2 * j] = 1;
            }
        }
    }
    cap[2 * f + 1][sink] = 1;
    cap[2 * t + 1][sink] = 1;
    let source = 2 * v + 1;

    let mut flow = 0;
    while flow < 2 {
        let mut prev = vec![usize::MAX; size];
        prev[source] = source;
        let mut queue = std::collections::VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            for w in 0..size {
                if prev[w] == usize::MAX && cap[u][w] > 0 {
                    prev[w] = u;
                    queue.push_back(w);
                }
            }
        }
        if prev[sink] == usize::MAX {
            break;
        }
        let mut w = sink;
        while w != source {
            let u = prev[w];
            cap[u][w] -= 1;
            cap[w][u] += 1;
            w = u;
        }
        flow += 1;
    }
    flow == 2
}

struct Search<'c, 'q> {
    catalog: &'c Catalog,
    req: &'q QueryRequirements,
    candidates: Vec<Vec<&'c ResolvedProduct>>,
    supply: Vec<Balance<'c>>,
    verdicts: VerdictCache<'c>,
    found: Vec<Configuration>,
}

impl<'c> Search<'c, '_> {
    fn choose(&mut self, slot: usize, chosen: &mut Vec<&'c ResolvedProduct>) {
        if slot == self.candidates.len() {
            self.match_ports(chosen);
            return;
        }
        for i in 0..self.candidates[slot].len() {
            let cand = self.candidates[slot][i];
            let coexists = chosen.iter().all(|p| {
                let v = self.verdicts.coexist(&p.id, &cand.id);
                !matches!(v.status, VerdictStatus::Incompatible | VerdictStatus::Conflict)
            });
            if !coexists {
                continue;
            }
            chosen.push(cand);
            if balance_feasible(chosen, &self.supply[slot + 1..]) {
                self.choose(slot + 1, chosen);
            }
            chosen.pop();
        }
    }

    fn match_ports(&mut self, chosen: &[&'c ResolvedProduct]) {
        let mut outputs: Vec<(&str, &Port)> = Vec::new();
        let mut inputs: Vec<(&str, &Port)> = Vec::new();
        for p in chosen {
            for port in p.ports() {
                match port.orientation {
                    Orientation::Output => outputs.push((&p.id, port)),
                    Orientation::Input => inputs.push((&p.id, port)),
                }
            }
        }
        if outputs.len() != inputs.len() {
            return;
        }

        // admissible partners per output, with the verdict each pair gets
        let threshold = self.req.min_justification;
        let mut options: Vec<Vec<usize>> = Vec::with_capacity(outputs.len());
        let mut conditional: HashMap<(usize, usize), String> = HashMap::new();
        for (oi, (op, oport)) in outputs.iter().enumerate() {
            let mut opts = Vec::new();
            for (ii, (ip, iport)) in inputs.iter().enumerate() {
                if op == ip || oport.port_type.value != iport.port_type.value {
                    continue;
                }
                let v = self.verdicts.direct(op, ip);
                let usable = match &v.status {
                    VerdictStatus::CompatibleByDefault | VerdictStatus::CompatibleByEvidence => true,
                    VerdictStatus::ConditionallyIncompatible(m) => {
                        conditional.insert((oi, ii), m.clone());
                        true
                    }
                    VerdictStatus::Incompatible | VerdictStatus::Conflict => false,
                };
                let strong_enough = threshold.is_none_or(|t| v.strength.is_some_and(|s| s >= t));
                if usable && strong_enough {
                    opts.push(ii);
                }
            }
            if opts.is_empty() {
                return;
            }
            options.push(opts);
        }

        let mut assignment = vec![usize::MAX; outputs.len()];
        let mut used = vec![false; inputs.len()];
        let mut complete = Vec::new();
        fn assign(
            at: usize,
            options: &[Vec<usize>],
            assignment: &mut [usize],
            used: &mut [bool],
            complete: &mut Vec<Vec<usize>>,
        ) {
            if at == options.len() {
                complete.push(assignment.to_vec());
                return;
            }
            for &ii in &options[at] {
                if !used[ii] {
                    used[ii] = true;
                    assignment[at] = ii;
                    assign(at + 1, options, assignment, used, complete);
                    used[ii] = false;
                }
            }
        }
        assign(0, &options, &mut assignment, &mut used, &mut complete);

        let ids: BTreeSet<&str> = chosen.iter().map(|p| p.id.as_str()).collect();
        for assignment in complete {
            let mut adj: BTreeMap<&str, BTreeSet<&str>> = ids.iter().map(|id| (*id, BTreeSet::new())).collect();
            for (oi, &ii) in assignment.iter().enumerate() {
                adj.get_mut(outputs[oi].0).unwrap().insert(inputs[ii].0);
                adj.get_mut(inputs[ii].0).unwrap().insert(outputs[oi].0);
            }
            if !self.connected(&adj) || !self.adapter_in_place(chosen, &adj) {
                continue;
            }
            let mediated_ok = assignment.iter().enumerate().all(|(oi, &ii)| {
                conditional
                    .get(&(oi, ii))
                    .is_none_or(|m| ids.contains(m.as_str()) && routes_through(&adj, outputs[oi].0, inputs[ii].0, m))
            });
            if !mediated_ok {
                continue;
            }
            let matching = assignment
                .iter()
                .enumerate()
                .map(|(oi, &ii)| {
                    Connection::new(
                        PortRef::new(outputs[oi].0, &outputs[oi].1.id),
                        PortRef::new(inputs[ii].0, &inputs[ii].1.id),
                    )
                })
                .collect();
            let cfg = assemble(self.catalog, self.req, chosen, matching, &mut self.verdicts);
            self.found.push(cfg);
        }
    }

    fn connected(&self, adj: &BTreeMap<&str, BTreeSet<&str>>) -> bool {
        // union-find over product names
        let names: Vec<&str> = adj.keys().copied().collect();
        let mut parent: Vec<usize> = (0..names.len()).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for (i, n) in names.iter().enumerate() {
            for nb in &adj[n] {
                let j = names.iter().position(|m| m == nb).unwrap();
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
        let r0 = root(&mut parent, 0);
        (0..names.len()).all(|i| root(&mut parent, i) == r0)
    }

    fn adapter_in_place(&self, chosen: &[&ResolvedProduct], adj: &BTreeMap<&str, BTreeSet<&str>>) -> bool {
        if self.req.size_k != 5 {
            return true;
        }
        // slots 0, 1, 2 are arm, flange adapter, EECD
        let (arm, adapter, eecd) = (chosen[0].id.as_str(), chosen[1].id.as_str(), chosen[2].id.as_str());
        adj[adapter].contains(arm) && adj[adapter].contains(eecd)
    }
}

/// Every valid configuration for `req`, in canonical order.
pub fn enumerate_configurations(catalog: &Catalog, req: &QueryRequirements) -> Result<Vec<Configuration>, SolverError> {
    let application = req.validate(catalog)?;
    let roles = req.roles();
    if req
        .extra_required_attributes
        .iter()
        .any(|x| !roles.contains(&x.product_type.as_str()))
    {
        return Ok(Vec::new());
    }

    let candidates: Vec<Vec<&ResolvedProduct>> = roles
        .iter()
        .map(|role| {
            let mut c: Vec<&ResolvedProduct> = catalog
                .products()
                .iter()
                .filter(|p| p.product_type() == Some(role))
                .filter(|p| {
                    *role != END_EFFECTOR
                        || application
                            .end_effector_subtype
                            .as_deref()
                            .is_none_or(|st| p.attribute_value("subtype") == Some(st))
                })
                .filter(|p| {
                    req.extra_required_attributes
                        .iter()
                        .filter(|x| x.product_type == *role)
                        .all(|x| p.attribute_value(&x.name) == Some(x.value.as_str()))
                })
                .collect();
            c.sort_by(|a, b| a.id.cmp(&b.id));
            c
        })
        .collect();
    let supply = candidates.iter().map(|c| supply_of(c)).collect();

    let mut search = Search {
        catalog,
        req,
        candidates,
        supply,
        verdicts: VerdictCache::new(catalog),
        found: Vec::new(),
    };
    search.choose(0, &mut Vec::with_capacity(roles.len()));
    let mut found = search.found;
    found.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(found)
}

/// All perfect pairings of `ports`, skipping pairs no configuration could
/// ever accept (same product, same orientation or different interface).
fn pairings<'a>(ports: &[(&'a str, &'a Port)]) -> Vec<Vec<Connection>> {
    fn go<'a>(
        ports: &[(&'a str, &'a Port)],
        used: &mut [bool],
        current: &mut Vec<Connection>,
        out: &mut Vec<Vec<Connection>>,
    ) {
        let Some(first) = used.iter().position(|u| !u) else {
            out.push(current.clone());
            return;
        };
        used[first] = true;
        for other in first + 1..ports.len() {
            if used[other] {
                continue;
            }
            let (a, b) = (ports[first], ports[other]);
            if a.0 == b.0 || !structurally_matches(a.1, b.1) {
                continue;
            }
            used[other] = true;
            current.push(output_first(a, b));
            go(ports, used, current, out);
            current.pop();
            used[other] = false;
        }
        used[first] = false;
    }
    let mut out = Vec::new();
    if ports.len().is_multiple_of(2) {
        go(ports, &mut vec![false; ports.len()], &mut Vec::new(), &mut out);
    }
    out
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive reference enumeration for small catalogs.
pub fn enumerate_bruteforce(catalog: &Catalog, req: &QueryRequirements) -> Result<Vec<Configuration>, SolverError> {
    let n = catalog.products().len();
    if n > BRUTEFORCE_MAX_PRODUCTS {
        return Err(SolverError::CatalogTooLarge {
            products: n,
            max: BRUTEFORCE_MAX_PRODUCTS,
        });
    }
    req.validate(catalog)?;
    let mut verdicts = VerdictCache::new(catalog);
    let mut found = Vec::new();
    for subset in subsets(n, req.size_k) {
        let products: Vec<&ResolvedProduct> = subset.iter().map(|&i| &catalog.products()[i]).collect();
        let ids: Vec<String> = products.iter().map(|p| p.id.clone()).collect();
        let ports: Vec<(&str, &Port)> = products
            .iter()
            .flat_map(|p| p.ports().map(move |port| (p.id.as_str(), port)))
            .collect();
        for matching in pairings(&ports) {
            if check_configuration(catalog, &ids, &matching, req)?.is_empty() {
                found.push(assemble(catalog, req, &products, matching, &mut verdicts));
            }
        }
    }
    found.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
    Ok(found)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExplainedProduct {
    pub id: String,
    pub display_name: String,
    pub manufacturer: String,
    pub product_type: String,
}

/// Human-readable account of why a configuration is valid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Explanation {
    pub products: Vec<ExplainedProduct>,
    pub certainty: Certainty,
    pub connections: Vec<ConnectionExplanation>,
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "certainty: {}", self.certainty)?;
        writeln!(f, "products:")?;
        for p in &self.products {
            writeln!(
                f,
                "  {:<16} {} ({}, {})",
                p.product_type, p.display_name, p.manufacturer, p.id
            )?;
        }
        writeln!(f, "connections:")?;
        for c in &self.connections {
            writeln!(
                f,
                "  {} (output) -> {} (input) over {}: {}",
                c.connection.a, c.connection.b, c.port_type, c.summary
            )?;
        }
        Ok(())
    }
}

/// Explains `cfg`, which must come from a query against this same catalog.
pub fn explain(catalog: &Catalog, cfg: &Configuration) -> Result<Explanation, SolverError> {
    if cfg.catalog_fingerprint != catalog.fingerprint() {
        return Err(SolverError::StaleConfiguration);
    }
    let products = cfg
        .products
        .iter()
        .map(|id| {
            let p = catalog.product(id).ok_or(SolverError::StaleConfiguration)?;
            Ok(ExplainedProduct {
                id: p.id.clone(),
                display_name: p.display_name.clone(),
                manufacturer: p.manufacturer.clone(),
                product_type: p.product_type().unwrap_or("").to_string(),
            })
        })
        .collect::<Result<_, SolverError>>()?;
    Ok(Explanation {
        products,
        certainty: cfg.certainty,
        connections: cfg.explanations.clone(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyReason {
    DefaultOnly,
    Conflict,
    BelowThreshold,
}

/// A product pair whose compatibility would be worth researching.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct UncertaintyEntry {
    pub pair: (String, String),
    pub reason: UncertaintyReason,
    pub details: String,
}

/// Pairs that could be connected but whose compatibility rests on the
/// default, on contradicting evidence, or on evidence weaker than
/// `min_justification`.
pub fn report_uncertain(catalog: &Catalog, min_justification: Option<JustificationLevel>) -> Vec<UncertaintyEntry> {
    let products = catalog.products();
    let mut out = BTreeSet::new();
    for (i, a) in products.iter().enumerate() {
        for b in &products[i + 1..] {
            let connectable = a.ports().any(|pa| b.ports().any(|pb| structurally_matches(pa, pb)));
            if !connectable || a.id == b.id {
                continue;
            }
            let pair = if a.id <= b.id {
                (a.id.clone(), b.id.clone())
            } else {
                (b.id.clone(), a.id.clone())
            };
            for scope in [Scope::Direct, Scope::Configuration] {
                let v = resolve_compatibility(catalog, &a.id, &b.id, scope).expect("catalog products");
                let scope_name = match scope {
                    Scope::Direct => "as neighbours",
                    Scope::Configuration => "in one configuration",
                };
                let entry = |reason, details: String| UncertaintyEntry {
                    pair: pair.clone(),
                    reason,
                    details,
                };
                match (&v.status, v.strength) {
                    (VerdictStatus::CompatibleByDefault, _) if scope == Scope::Direct => {
                        out.insert(entry(
                            UncertaintyReason::DefaultOnly,
                            "same interface, no evidence either way".to_string(),
                        ));
                    }
                    (VerdictStatus::Conflict, Some(level)) => {
                        out.insert(entry(
                            UncertaintyReason::Conflict,
                            format!("contradicting {level} claims {scope_name}"),
                        ));
                    }
                    (_, Some(level)) if min_justification.is_some_and(|t| level < t) => {
                        out.insert(entry(
                            UncertaintyReason::BelowThreshold,
                            format!(
                                "strongest evidence {scope_name} is {level}, below {}",
                                min_justification.unwrap()
                            ),
                        ));
                    }
                    _ => {}
                }
            }
        }
    }
    // one entry per pair and reason
    let mut seen = BTreeSet::new();
    out.into_iter()
        .filter(|e| seen.insert((e.pair.clone(), e.reason)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_count() {
        assert_eq!(subsets(6, 4).len(), 15);
        assert_eq!(subsets(3, 4).len(), 0);
        assert_eq!(subsets(5, 5), vec![vec![0, 1, 2, 3, 4]]);
    }

    fn graph<'a>(edges: &[(&'a str, &'a str)]) -> BTreeMap<&'a str, BTreeSet<&'a str>> {
        let mut adj: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (a, b) in edges {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    #[test]
    fn routes_through_agrees_with_path_search() {
        let cycle = graph(&[("arm", "eecd"), ("eecd", "ee"), ("arm", "dc"), ("dc", "ee")]);
        assert!(routes_through(&cycle, "arm", "eecd", "dc"));
        let spur = graph(&[("arm", "eecd"), ("eecd", "ee"), ("arm", "dc")]);
        assert!(!routes_through(&spur, "arm", "eecd", "dc"));
        // dc only reachable through arm again: no simple path
        let bow = graph(&[("arm", "eecd"), ("arm", "x"), ("x", "dc"), ("dc", "arm")]);
        assert!(!routes_through(&bow, "arm", "eecd", "dc"));
        for (adj, from, to, via) in [
            (&cycle, "arm", "eecd", "dc"),
            (&spur, "arm", "eecd", "dc"),
            (&bow, "arm", "eecd", "dc"),
            (&cycle, "eecd", "dc", "ee"),
        ] {
            assert_eq!(
                routes_through(adj, from, to, via),
                crate::reasoning::on_some_path(adj, from, to, via)
            );
        }
    }
}
