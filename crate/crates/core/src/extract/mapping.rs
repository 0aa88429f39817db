//! Mapping table M1: recognised source constructs and the graph elements
//! they produce. The walk collects facts in program order; `finish` turns
//! them into a model graph with deterministic element ids.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use crate::graph::{edge_label as label, node_type as ty, AttrValue, ModelGraph, NodeId};

/// Discrete-action Gym environments with known action and observation
/// sizes: (id, numActions, numStates).
pub const KNOWN_ENVIRONMENTS: &[(&str, i64, i64)] = &[
    ("CartPole-v0", 2, 4),
    ("CartPole-v1", 2, 4),
    ("MountainCar-v0", 3, 2),
    ("Acrobot-v1", 3, 6),
    ("LunarLander-v2", 4, 8),
    ("FrozenLake-v0", 4, 16),
    ("FrozenLake-v1", 4, 16),
    ("FrozenLake8x8-v0", 4, 64),
    ("Taxi-v2", 6, 500),
    ("Taxi-v3", 6, 500),
    ("NChain-v0", 2, 5),
];

const RANDOM_DRAWS: &[&str] = &["rand", "random", "uniform", "random_sample"];
const RANDOM_ACTIONS: &[&str] = &["sample", "randint", "randrange", "choice"];
const MAX_CALLS: &[&str] = &["max", "amax", "reduce_max", "nanmax"];
const PREDICT_CALLS: &[&str] = &["predict", "predict_on_batch"];
const TRAIN_CALLS: &[&str] = &["fit", "train_on_batch"];

const HYPERPARAMETERS: &[(&str, &str)] = &[
    ("batch_size", "batchSize"),
    ("epochs", "epochs"),
    ("num_epochs", "epochs"),
    ("buffer_size", "replayBufferSize"),
    ("memory_size", "replayBufferSize"),
];

pub fn build_model(module: &Module, nonempty: bool) -> ModelGraph {
    let bindings = Bindings::collect(&module.body);
    let functions = summarize_functions(&module.body, &bindings);
    let mut w = Walker::new(&bindings, &functions);
    w.block(&module.body);
    w.finish(nonempty)
}

// ---- one-step literal resolution ----

struct Binding<'a> {
    value: &'a Expr,
    line: u32,
}

/// Names bound exactly once by a plain assignment at module level.
struct Bindings<'a> {
    single: BTreeMap<&'a str, Binding<'a>>,
}

impl<'a> Bindings<'a> {
    fn collect(body: &'a [Stmt]) -> Self {
        let mut seen: BTreeMap<&str, Option<Binding>> = BTreeMap::new();
        for s in body {
            let StmtKind::Assign { targets, value } = &s.kind else {
                continue;
            };
            for t in targets {
                if let Some(n) = t.name() {
                    seen.entry(n)
                        .and_modify(|b| *b = None)
                        .or_insert(Some(Binding {
                            value,
                            line: s.line,
                        }));
                }
            }
        }
        Bindings {
            single: seen
                .into_iter()
                .filter_map(|(k, v)| Some((k, v?)))
                .collect(),
        }
    }

    fn value_of(&self, name: &str) -> Option<&'a Expr> {
        self.single.get(name).map(|b| b.value)
    }

    /// A numeric literal, or a name bound once to one.
    fn num(&self, e: &Expr) -> Option<AttrValue> {
        literal(e).or_else(|| literal(self.value_of(e.name()?)?))
    }

    fn int(&self, e: &Expr) -> Option<i64> {
        match self.num(e)? {
            AttrValue::Int(v) => Some(v),
            _ => None,
        }
    }

    fn real(&self, e: &Expr) -> Option<f64> {
        self.num(e)?.as_f64()
    }

    /// `E.action_space.n`, directly or through a name bound once to it.
    fn action_space_of(&self, e: &Expr) -> Option<String> {
        action_space_env(e).or_else(|| action_space_env(self.value_of(e.name()?)?))
    }
}

fn literal(e: &Expr) -> Option<AttrValue> {
    match &e.kind {
        ExprKind::Int(v) => Some(AttrValue::Int(*v)),
        ExprKind::Float(v) => Some(AttrValue::Real(*v)),
        ExprKind::UnaryOp {
            op: UnaryOp::Neg,
            operand,
        } => match literal(operand)? {
            AttrValue::Int(v) => Some(AttrValue::Int(-v)),
            AttrValue::Real(v) => Some(AttrValue::Real(-v)),
            _ => None,
        },
        _ => None,
    }
}

fn action_space_env(e: &Expr) -> Option<String> {
    let ExprKind::Attribute { value, attr } = &e.kind else {
        return None;
    };
    let ExprKind::Attribute {
        value: env,
        attr: space,
    } = &value.kind
    else {
        return None;
    };
    (attr == "n" && space == "action_space").then(|| env.name().map(str::to_string))?
}

fn calls_in(e: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    e.walk(&mut |x| {
        if matches!(x.kind, ExprKind::Call { .. }) {
            out.push(x);
        }
    });
    out
}

fn calls_tail(e: &Expr, tails: &[&str]) -> bool {
    e.any(&mut |x| x.callee_tail().is_some_and(|t| tails.contains(&t)))
}

fn block_calls(body: &[Stmt], tails: &[&str]) -> bool {
    let mut hit = false;
    walk_stmts(body, &mut |s| {
        hit = hit || s.exprs().iter().any(|e| calls_tail(e, tails));
    });
    hit
}

/// Receivers of `X.method(...)` calls inside `e`.
fn method_receivers(e: &Expr, methods: &[&str]) -> Vec<String> {
    calls_in(e)
        .into_iter()
        .filter_map(|c| {
            let (recv, m) = c.method_receiver()?;
            methods
                .contains(&m)
                .then(|| recv.name().map(str::to_string))?
        })
        .collect()
}

fn target_names(e: &Expr, out: &mut Vec<String>) {
    match &e.kind {
        ExprKind::Name(n) => out.push(n.clone()),
        ExprKind::Tuple(items) | ExprKind::List(items) => {
            for i in items {
                target_names(i, out);
            }
        }
        ExprKind::Starred(inner) => target_names(inner, out),
        _ => {}
    }
}

fn mult_factors<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
    match &e.kind {
        ExprKind::BinOp {
            left,
            op: BinOp::Mult,
            right,
        } => {
            mult_factors(left, out);
            mult_factors(right, out);
        }
        _ => out.push(e),
    }
}

// ---- networks ----

#[derive(Debug, Clone, PartialEq)]
enum Units {
    Literal(i64),
    ActionSpace(String),
    Unknown,
}

#[derive(Debug, Clone)]
struct Layer {
    units: Units,
    activation: String,
}

#[derive(Debug, Clone, Default)]
struct NetSpec {
    last: Option<Layer>,
}

fn activation_name(e: Option<&Expr>) -> String {
    let Some(e) = e else {
        return "linear".into();
    };
    match &e.kind {
        ExprKind::Str(s) => s.clone(),
        ExprKind::NoneLit => "linear".into(),
        ExprKind::Attribute { attr, .. } => attr.clone(),
        ExprKind::Name(n) => n.clone(),
        _ => "linear".into(),
    }
}

fn dense_layer(e: &Expr, b: &Bindings) -> Option<Layer> {
    if e.callee_tail() != Some("Dense") {
        return None;
    }
    let (args, _) = e.call_args()?;
    let units = args.first().or_else(|| e.keyword("units"));
    let units = match units {
        Some(u) => match (b.int(u), b.action_space_of(u)) {
            (Some(v), _) => Units::Literal(v),
            (None, Some(env)) => Units::ActionSpace(env),
            _ => Units::Unknown,
        },
        None => Units::Unknown,
    };
    Some(Layer {
        units,
        activation: activation_name(e.keyword("activation")),
    })
}

impl NetSpec {
    fn from_sequential(call: &Expr, b: &Bindings) -> Self {
        let mut spec = NetSpec::default();
        if let Some((args, _)) = call.call_args() {
            if let Some(ExprKind::List(layers)) = args.first().map(|a| &a.kind) {
                for l in layers {
                    spec.add(l, b);
                }
            }
        }
        spec
    }

    fn add(&mut self, layer: &Expr, b: &Bindings) {
        if let Some(d) = dense_layer(layer, b) {
            self.last = Some(d);
        } else if layer.callee_tail() == Some("Activation") {
            if let (Some(last), Some((args, _))) = (self.last.as_mut(), layer.call_args()) {
                last.activation = activation_name(args.first());
            }
        }
    }
}

fn is_sequential(e: &Expr) -> bool {
    e.callee_tail() == Some("Sequential")
}

// ---- function summaries ----

#[derive(Default)]
struct FunctionSummary {
    /// Network built and returned by a factory function.
    network: Option<NetSpec>,
    /// `(destination, source)` weight copies.
    copies: Vec<(String, String)>,
    predicts: Vec<String>,
}

fn weight_copy(call: &Expr) -> Option<(String, String)> {
    let (recv, m) = call.method_receiver()?;
    if m != "set_weights" {
        return None;
    }
    let (args, _) = call.call_args()?;
    let (src, m2) = args.first()?.method_receiver()?;
    if m2 != "get_weights" {
        return None;
    }
    let (dst, src) = (recv.name()?, src.name()?);
    (dst != src).then(|| (dst.to_string(), src.to_string()))
}

fn summarize_functions(body: &[Stmt], b: &Bindings) -> BTreeMap<String, FunctionSummary> {
    let mut out = BTreeMap::new();
    walk_stmts(body, &mut |s| {
        let StmtKind::FunctionDef { name, body, .. } = &s.kind else {
            return;
        };
        let mut summary = FunctionSummary::default();
        let mut locals: BTreeMap<String, NetSpec> = BTreeMap::new();
        walk_stmts(body, &mut |s| {
            if let StmtKind::FunctionDef { .. } = s.kind {
                return;
            }
            match &s.kind {
                StmtKind::Assign { targets, value } if is_sequential(value) => {
                    for t in targets.iter().filter_map(Expr::name) {
                        locals.insert(t.to_string(), NetSpec::from_sequential(value, b));
                    }
                }
                StmtKind::Return(Some(e)) => {
                    if is_sequential(e) {
                        summary.network = Some(NetSpec::from_sequential(e, b));
                    } else if let Some(spec) = e.name().and_then(|n| locals.get(n)) {
                        summary.network = Some(spec.clone());
                    }
                }
                _ => {}
            }
            for e in s.exprs() {
                for c in calls_in(e) {
                    if let Some(copy) = weight_copy(c) {
                        summary.copies.push(copy);
                    }
                    if let Some((recv, m)) = c.method_receiver() {
                        if m == "add" {
                            if let (Some(spec), Some((args, _))) =
                                (recv.name().and_then(|n| locals.get_mut(n)), c.call_args())
                            {
                                if let Some(layer) = args.first() {
                                    spec.add(layer, b);
                                }
                            }
                        }
                    }
                }
                summary.predicts.extend(method_receivers(e, PREDICT_CALLS));
            }
        });
        out.insert(name.clone(), summary);
    });
    out
}

// ---- facts ----

struct EnvFact {
    line: u32,
    id: Option<String>,
    actions_cmp: Option<i64>,
}

struct StepFact {
    receiver: String,
    line: u32,
    done: Option<String>,
    loops: Vec<usize>,
    order: usize,
}

struct CheckFact {
    name: String,
    line: u32,
    loops: Vec<usize>,
    order: usize,
}

struct NetFact {
    name: String,
    line: u32,
    spec: NetSpec,
}

struct CopyFact {
    dst: String,
    src: String,
    guard: Option<Option<i64>>,
}

struct UpdateFact {
    line: u32,
    gamma: Option<f64>,
    has_max: bool,
    target_predicts: Vec<String>,
}

struct ExploreFact {
    line: u32,
    eps: String,
}

enum EpsUpdate {
    Final(String, f64),
    Decay(String, f64),
}

struct Walker<'a> {
    b: &'a Bindings<'a>,
    functions: &'a BTreeMap<String, FunctionSummary>,
    loops: Vec<usize>,
    loop_targets: Vec<Vec<String>>,
    guards: Vec<&'a Expr>,
    function_depth: usize,
    order: usize,
    pending_done: Option<String>,
    /// Latest single-name assignment per name in the current function.
    aliases: BTreeMap<String, &'a Expr>,

    envs: Vec<EnvFact>,
    env_names: BTreeMap<String, usize>,
    resets: Vec<(String, u32)>,
    closes: Vec<(String, u32)>,
    steps: Vec<StepFact>,
    checks: Vec<CheckFact>,
    nets: Vec<NetFact>,
    trained: BTreeSet<String>,
    predicts: Vec<(String, Vec<usize>)>,
    copies: Vec<CopyFact>,
    updates: Vec<UpdateFact>,
    explorations: Vec<ExploreFact>,
    eps_updates: Vec<EpsUpdate>,
}

impl<'a> Walker<'a> {
    fn new(b: &'a Bindings<'a>, functions: &'a BTreeMap<String, FunctionSummary>) -> Self {
        Walker {
            b,
            functions,
            loops: Vec::new(),
            loop_targets: Vec::new(),
            guards: Vec::new(),
            function_depth: 0,
            order: 0,
            pending_done: None,
            aliases: BTreeMap::new(),
            envs: Vec::new(),
            env_names: BTreeMap::new(),
            resets: Vec::new(),
            closes: Vec::new(),
            steps: Vec::new(),
            checks: Vec::new(),
            nets: Vec::new(),
            trained: BTreeSet::new(),
            predicts: Vec::new(),
            copies: Vec::new(),
            updates: Vec::new(),
            explorations: Vec::new(),
            eps_updates: Vec::new(),
        }
    }

    fn block(&mut self, body: &'a [Stmt]) {
        for (i, s) in body.iter().enumerate() {
            self.stmt(s, &body[i + 1..]);
        }
    }

    fn enter_loop(&mut self, target: Option<&Expr>) {
        let mut names = Vec::new();
        if let Some(t) = target {
            target_names(t, &mut names);
        }
        self.loops.push(self.loop_targets.len());
        self.loop_targets.push(names);
    }

    fn stmt(&mut self, s: &'a Stmt, rest: &'a [Stmt]) {
        self.order += 1;
        match &s.kind {
            StmtKind::FunctionDef { body, .. } => {
                let loops = std::mem::take(&mut self.loops);
                let guards = std::mem::take(&mut self.guards);
                let aliases = std::mem::take(&mut self.aliases);
                self.function_depth += 1;
                self.block(body);
                self.function_depth -= 1;
                self.loops = loops;
                self.guards = guards;
                self.aliases = aliases;
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
            } => {
                self.exprs(iter, s.line);
                self.enter_loop(Some(target));
                self.block(body);
                self.loops.pop();
                self.block(orelse);
            }
            StmtKind::While { test, body, orelse } => {
                self.enter_loop(None);
                self.condition(test, s.line);
                self.exprs(test, s.line);
                self.block(body);
                self.loops.pop();
                self.block(orelse);
            }
            StmtKind::If { test, body, orelse } => {
                self.condition(test, s.line);
                self.exprs(test, s.line);
                self.exploration(test, body, orelse, rest, s.line);
                self.epsilon_limit(test, body);
                self.guards.push(test);
                self.block(body);
                self.guards.pop();
                self.block(orelse);
            }
            StmtKind::With { items, body } => {
                for (e, _) in items {
                    self.exprs(e, s.line);
                }
                self.block(body);
            }
            StmtKind::Assign { targets, value } => {
                self.assign(targets, value, s.line);
                for t in targets {
                    self.exprs(t, s.line);
                }
            }
            StmtKind::AugAssign { target, op, value } => {
                if let (Some(eps), Some(c)) = (target.name(), self.b.real(value)) {
                    if matches!(op, BinOp::Mult | BinOp::Sub) {
                        self.eps_updates.push(EpsUpdate::Decay(eps.to_string(), c));
                    }
                }
                self.exprs(value, s.line);
            }
            StmtKind::Expr(e) | StmtKind::Return(Some(e)) => self.exprs(e, s.line),
            _ => {}
        }
    }

    fn assign(&mut self, targets: &'a [Expr], value: &'a Expr, line: u32) {
        let names: Vec<&str> = targets.iter().filter_map(Expr::name).collect();

        let mut env_call = value;
        while let ExprKind::Attribute { value: inner, attr } = &env_call.kind {
            if attr != "unwrapped" && attr != "env" {
                break;
            }
            env_call = inner;
        }
        let is_make = env_call
            .call_args()
            .and_then(|_| match &env_call.kind {
                ExprKind::Call { func, .. } => func.dotted(),
                _ => None,
            })
            .is_some_and(|d| d == "gym.make" || d == "gymnasium.make");
        if is_make {
            let id = env_call
                .call_args()
                .and_then(|(args, _)| match &args.first()?.kind {
                    ExprKind::Str(s) => Some(s.clone()),
                    _ => None,
                });
            for n in &names {
                self.env_names.insert(n.to_string(), self.envs.len());
                self.envs.push(EnvFact {
                    line,
                    id: id.clone(),
                    actions_cmp: None,
                });
            }
        }

        if self.function_depth == 0 {
            let spec = if is_sequential(value) {
                Some(NetSpec::from_sequential(value, self.b))
            } else if value.callee_tail() == Some("clone_model") {
                let src = value.call_args().and_then(|(a, _)| a.first()?.name());
                src.and_then(|n| self.net(n)).map(|f| f.spec.clone())
            } else if let ExprKind::Call { func, .. } = &value.kind {
                func.name()
                    .and_then(|f| self.functions.get(f))
                    .and_then(|f| f.network.clone())
            } else {
                None
            };
            if let Some(spec) = spec {
                for n in &names {
                    self.nets.retain(|f| f.name != *n);
                    self.nets.push(NetFact {
                        name: n.to_string(),
                        line,
                        spec: spec.clone(),
                    });
                }
            }
        }

        if let Some(ExprKind::Tuple(items) | ExprKind::List(items)) =
            targets.first().map(|t| &t.kind)
        {
            if items.len() >= 3 && calls_in(value).iter().any(|c| self.step_call(c).is_some()) {
                self.pending_done = items[2].name().map(str::to_string);
            }
        }

        if let [eps] = names[..] {
            self.epsilon_assignment(eps, value);
        }
        if let Some(u) = self.update_shape(value, line) {
            self.updates.push(u);
        }
        if let [n] = names[..] {
            self.aliases.insert(n.to_string(), value);
        }
        self.exprs(value, line);
        self.pending_done = None;
    }

    fn epsilon_assignment(&mut self, eps: &str, value: &Expr) {
        let mentions = |e: &Expr| e.mentions_name(eps);
        let decay_of = |e: &Expr, out: &mut Vec<EpsUpdate>| {
            let mut f = Vec::new();
            mult_factors(e, &mut f);
            if f.len() == 2 {
                if let Some(c) = f
                    .iter()
                    .find(|x| x.name() != Some(eps))
                    .and_then(|x| self.b.real(x))
                {
                    if f.iter().any(|x| x.name() == Some(eps)) {
                        out.push(EpsUpdate::Decay(eps.to_string(), c));
                    }
                }
            }
        };
        let mut out = Vec::new();
        match &value.kind {
            ExprKind::Call { args, .. }
                if value.callee_tail() == Some("max") && args.len() == 2 =>
            {
                let (with, without) = if mentions(&args[0]) {
                    (&args[0], &args[1])
                } else {
                    (&args[1], &args[0])
                };
                if mentions(with) && !mentions(without) {
                    if let Some(v) = self.b.real(without) {
                        out.push(EpsUpdate::Final(eps.to_string(), v));
                    }
                    decay_of(with, &mut out);
                }
            }
            ExprKind::BinOp {
                op: BinOp::Mult, ..
            } => decay_of(value, &mut out),
            // eps = lo + (hi - lo) * exp(-rate * t)
            ExprKind::BinOp {
                left,
                op: BinOp::Add,
                right,
            } if !mentions(value) => {
                let exp = calls_in(right)
                    .into_iter()
                    .find(|c| c.callee_tail() == Some("exp"));
                if let (Some(lo), Some(exp)) = (self.b.real(left), exp) {
                    out.push(EpsUpdate::Final(eps.to_string(), lo));
                    let mut rate = None;
                    exp.walk(&mut |x| {
                        if rate.is_none() && x.name().is_some() {
                            rate = self.b.real(x);
                        }
                    });
                    if let Some(r) = rate {
                        out.push(EpsUpdate::Decay(eps.to_string(), r));
                    }
                }
            }
            ExprKind::BinOp {
                left,
                op: BinOp::Sub,
                right,
            } if left.name() == Some(eps) => {
                if let Some(c) = self.b.real(right) {
                    out.push(EpsUpdate::Decay(eps.to_string(), c));
                }
            }
            _ => {}
        }
        self.eps_updates.extend(out);
    }

    /// `r + g * M` where M holds a network prediction or a max call,
    /// possibly through one local assignment (`q = max(...)`).
    fn update_shape(&self, value: &Expr, line: u32) -> Option<UpdateFact> {
        let holds_q = |f: &Expr| calls_tail(f, PREDICT_CALLS) || calls_tail(f, MAX_CALLS);
        let mut found = None;
        value.walk(&mut |e| {
            if found.is_some() {
                return;
            }
            let ExprKind::BinOp {
                left,
                op: BinOp::Add,
                right,
            } = &e.kind
            else {
                return;
            };
            for side in [right, left] {
                let mut factors = Vec::new();
                mult_factors(side, &mut factors);
                if factors.len() < 2 {
                    continue;
                }
                let Some(m) = factors.iter().position(|f| holds_q(f)).or_else(|| {
                    factors
                        .iter()
                        .position(|f| holds_q(self.alias_of(f).unwrap_or(f)))
                }) else {
                    continue;
                };
                let g = (0..factors.len()).find(|&i| {
                    let f = factors[i];
                    i != m
                        && (matches!(f.kind, ExprKind::Int(_) | ExprKind::Float(_))
                            || f.dotted().is_some())
                });
                if let Some(g) = g {
                    let q = self.alias_of(factors[m]).unwrap_or(factors[m]);
                    found = Some(UpdateFact {
                        line,
                        gamma: self.b.real(factors[g]),
                        has_max: calls_tail(q, MAX_CALLS),
                        target_predicts: method_receivers(q, PREDICT_CALLS),
                    });
                    return;
                }
            }
        });
        found
    }

    fn alias_of(&self, f: &Expr) -> Option<&'a Expr> {
        f.name().and_then(|n| self.aliases.get(n).copied())
    }

    fn net(&self, name: &str) -> Option<&NetFact> {
        self.nets.iter().find(|n| n.name == name)
    }

    fn step_call<'e>(&self, c: &'e Expr) -> Option<&'e str> {
        let (recv, m) = c.method_receiver()?;
        let n = recv.name()?;
        (m == "step" && self.is_env_name(n)).then_some(n)
    }

    fn is_env_name(&self, n: &str) -> bool {
        self.env_names.contains_key(n)
            || (self.envs.len() == 1 && n.to_ascii_lowercase().contains("env"))
    }

    fn sync_guard(&self) -> Option<Option<i64>> {
        self.guards.iter().rev().find_map(|g| mod_guard(g, self.b))
    }

    fn exprs(&mut self, e: &'a Expr, line: u32) {
        for c in calls_in(e) {
            if let Some(recv) = self.step_call(c) {
                self.steps.push(StepFact {
                    receiver: recv.to_string(),
                    line,
                    done: self.pending_done.take(),
                    loops: self.loops.clone(),
                    order: self.order,
                });
                continue;
            }
            if let Some((dst, src)) = weight_copy(c) {
                let guard = self.sync_guard();
                self.copies.push(CopyFact { dst, src, guard });
                continue;
            }
            if let Some((recv, m)) = c.method_receiver() {
                let Some(n) = recv.name() else { continue };
                match m {
                    "reset" if self.is_env_name(n) => self.resets.push((n.to_string(), line)),
                    "close" if self.is_env_name(n) => self.closes.push((n.to_string(), line)),
                    m if TRAIN_CALLS.contains(&m) => {
                        self.trained.insert(n.to_string());
                    }
                    m if PREDICT_CALLS.contains(&m) => {
                        self.predicts.push((n.to_string(), self.loops.clone()));
                    }
                    "add" if self.function_depth == 0 => {
                        if let Some(layer) = c.call_args().and_then(|(a, _)| a.first()) {
                            let b = self.b;
                            if let Some(net) = self.nets.iter_mut().rev().find(|f| f.name == n) {
                                net.spec.add(layer, b);
                            }
                        }
                    }
                    _ => {}
                }
            } else if let ExprKind::Call { func, .. } = &c.kind {
                if let Some(f) = func.name().and_then(|f| self.functions.get(f)) {
                    for p in &f.predicts {
                        self.predicts.push((p.clone(), self.loops.clone()));
                    }
                    let guard = self.sync_guard();
                    for (dst, src) in &f.copies {
                        self.copies.push(CopyFact {
                            dst: dst.clone(),
                            src: src.clone(),
                            guard,
                        });
                    }
                }
            }
        }
        e.walk(&mut |x| {
            let ExprKind::Compare {
                left,
                ops,
                comparators,
            } = &x.kind
            else {
                return;
            };
            if ops.len() != 1 || ops[0] != CmpOp::Eq {
                return;
            }
            let pair = [(&**left, &comparators[0]), (&comparators[0], &**left)];
            for (a, b) in pair {
                if let (Some(env), Some(v)) = (action_space_env(a), self.b.int(b)) {
                    if let Some(&i) = self.env_names.get(&env) {
                        self.envs[i].actions_cmp.get_or_insert(v);
                    }
                }
            }
        });
    }

    fn condition(&mut self, test: &Expr, line: u32) {
        let mut names = BTreeSet::new();
        test.walk(&mut |x| {
            if let Some(n) = x.name() {
                names.insert(n.to_string());
            }
        });
        for name in names {
            self.checks.push(CheckFact {
                name,
                line,
                loops: self.loops.clone(),
                order: self.order,
            });
        }
    }

    fn exploration(
        &mut self,
        test: &Expr,
        body: &'a [Stmt],
        orelse: &'a [Stmt],
        rest: &'a [Stmt],
        line: u32,
    ) {
        let ExprKind::Compare {
            left,
            ops,
            comparators,
        } = &test.kind
        else {
            return;
        };
        if ops.len() != 1 {
            return;
        }
        let draw = |e: &Expr| e.callee_tail().is_some_and(|t| RANDOM_DRAWS.contains(&t));
        // Normalised to `draw OP eps`.
        let (op, eps) = match (draw(left), comparators[0].name(), left.name()) {
            (true, Some(eps), _) => (ops[0], eps),
            (false, _, Some(eps)) if draw(&comparators[0]) => (ops[0].flipped(), eps),
            _ => return,
        };
        let (random_branch, greedy_branch) = match op {
            CmpOp::Lt | CmpOp::LtE => (body, orelse),
            CmpOp::Gt | CmpOp::GtE => (orelse, body),
            _ => return,
        };
        let greedy_branch = if greedy_branch.is_empty()
            && matches!(
                random_branch.last().map(|s| &s.kind),
                Some(StmtKind::Return(_) | StmtKind::Continue)
            ) {
            rest
        } else {
            greedy_branch
        };
        let networks: Vec<&str> = self.nets.iter().map(|n| n.name.as_str()).collect();
        let greedy = block_calls(greedy_branch, PREDICT_CALLS)
            || block_calls(greedy_branch, &["argmax"])
            || {
                let mut hit = false;
                walk_stmts(greedy_branch, &mut |s| {
                    hit = hit
                        || s.exprs()
                            .iter()
                            .any(|e| networks.iter().any(|n| e.mentions_name(n)));
                });
                hit
            };
        if block_calls(random_branch, RANDOM_ACTIONS) && greedy {
            self.explorations.push(ExploreFact {
                line,
                eps: eps.to_string(),
            });
        }
    }

    /// `if eps > LIMIT: eps *= c` style lower bounds.
    fn epsilon_limit(&mut self, test: &Expr, body: &[Stmt]) {
        let ExprKind::Compare {
            left,
            ops,
            comparators,
        } = &test.kind
        else {
            return;
        };
        if ops.len() != 1 {
            return;
        }
        let (eps, limit) = match (left.name(), ops[0], comparators[0].name()) {
            (Some(eps), CmpOp::Gt | CmpOp::GtE, _) => (eps, &comparators[0]),
            (_, CmpOp::Lt | CmpOp::LtE, Some(eps)) => (eps, &**left),
            _ => return,
        };
        let Some(v) = self.b.real(limit) else { return };
        let assigns_eps = body.iter().any(|s| match &s.kind {
            StmtKind::AugAssign { target, .. } => target.name() == Some(eps),
            StmtKind::Assign { targets, .. } => targets.iter().any(|t| t.name() == Some(eps)),
            _ => false,
        });
        if assigns_eps {
            self.eps_updates.push(EpsUpdate::Final(eps.to_string(), v));
        }
    }

    // ---- graph construction ----

    fn env_of(&self, receiver: &str) -> Option<usize> {
        self.env_names
            .get(receiver)
            .copied()
            .or_else(|| (self.envs.len() == 1).then_some(0))
    }

    /// Step that a done-flag test refers to: the innermost loop around the
    /// test that contains a Step binding the flag, unless a loop in between
    /// rebinds the name.
    fn resolve_check(&self, check: &CheckFact) -> Option<usize> {
        for &l in check.loops.iter().rev() {
            let in_loop: Vec<usize> = (0..self.steps.len())
                .filter(|&i| {
                    self.steps[i].done.as_deref() == Some(check.name.as_str())
                        && self.steps[i].loops.contains(&l)
                })
                .collect();
            if let Some(&last) = in_loop.last() {
                return in_loop
                    .iter()
                    .rev()
                    .find(|&&i| self.steps[i].order <= check.order)
                    .copied()
                    .or(Some(last));
            }
            if self.loop_targets[l].contains(&check.name) {
                return None;
            }
        }
        None
    }

    fn finish(self, nonempty: bool) -> ModelGraph {
        let mut g = ModelGraph::new();
        let program = g.add_node(ty::PROGRAM, [], nonempty.then_some(1));

        let mut env_nodes = Vec::new();
        let mut env_actions = Vec::new();
        for env in &self.envs {
            let known = env
                .id
                .as_deref()
                .and_then(|id| KNOWN_ENVIRONMENTS.iter().find(|k| k.0 == id));
            let actions = known.map(|k| k.1).or(env.actions_cmp);
            let mut attrs = Vec::new();
            if let Some(a) = actions {
                attrs.push(("numActions".to_string(), AttrValue::Int(a)));
            }
            if let Some(k) = known {
                attrs.push(("numStates".to_string(), AttrValue::Int(k.2)));
            }
            let e = g.add_node(ty::ENVIRONMENT, attrs, Some(env.line));
            let i = g.add_node(ty::INITIALIZE, [], Some(env.line));
            g.add_edge(label::HAS_ENV, program, e);
            g.add_edge(label::INITIALIZED_BY, e, i);
            env_nodes.push((e, i));
            env_actions.push(actions);
        }

        let mut step_nodes: Vec<Option<NodeId>> = Vec::new();
        let mut first_step = vec![false; self.envs.len()];
        let mut last_in_loop: BTreeMap<(usize, Option<usize>), NodeId> = BTreeMap::new();
        for step in &self.steps {
            let Some(env) = self.env_of(&step.receiver) else {
                step_nodes.push(None);
                continue;
            };
            let s = g.add_node(ty::STEP, [], Some(step.line));
            if !first_step[env] {
                first_step[env] = true;
                g.add_edge(label::FOLLOWED_BY, env_nodes[env].1, s);
            }
            if let Some(prev) = last_in_loop.insert((env, step.loops.last().copied()), s) {
                g.add_edge(label::NEXT, prev, s);
            }
            step_nodes.push(Some(s));
        }

        let mut check_line: BTreeMap<usize, (usize, u32)> = BTreeMap::new();
        for check in &self.checks {
            if let Some(i) = self.resolve_check(check) {
                let e = check_line.entry(i).or_insert((check.order, check.line));
                if check.order < e.0 {
                    *e = (check.order, check.line);
                }
            }
        }
        for (i, (_, line)) in check_line {
            if let Some(s) = step_nodes[i] {
                let t = g.add_node(ty::TERMINAL_CHECK, [], Some(line));
                g.add_edge(label::CHECKED_BY, s, t);
            }
        }

        for (calls, node_type, edge) in [
            (&self.resets, ty::RESET, label::RESET_BY),
            (&self.closes, ty::CLOSE, label::CLOSED_BY),
        ] {
            for (recv, line) in calls {
                if let Some(env) = self.env_of(recv) {
                    let n = g.add_node(node_type, [], Some(*line));
                    g.add_edge(edge, env_nodes[env].0, n);
                }
            }
        }

        self.agent(&mut g, program, &step_nodes, &env_actions);
        g
    }

    fn agent(
        &self,
        g: &mut ModelGraph,
        program: NodeId,
        step_nodes: &[Option<NodeId>],
        env_actions: &[Option<i64>],
    ) {
        let mut q_nets: Vec<&NetFact> = self
            .nets
            .iter()
            .filter(|n| self.trained.contains(&n.name))
            .collect();
        if q_nets.is_empty() {
            q_nets.extend(self.nets.first());
        }
        let is_q = |n: &str| q_nets.iter().any(|q| q.name == n);
        let target_nets: Vec<&NetFact> = self
            .nets
            .iter()
            .filter(|n| !is_q(&n.name))
            .filter(|n| {
                self.copies.iter().any(|c| c.dst == n.name)
                    || self
                        .updates
                        .iter()
                        .any(|u| u.target_predicts.contains(&n.name))
            })
            .collect();

        let dqn = self.nets.first().map(|first| {
            let d = g.add_node(ty::DQN, [], Some(first.line));
            g.add_edge(label::HAS_AGENT, program, d);
            d
        });

        let mut q_nodes = Vec::new();
        for q in &q_nets {
            let mut attrs = Vec::new();
            if let Some(layer) = &q.spec.last {
                let dim = match &layer.units {
                    Units::Literal(v) => Some(*v),
                    Units::ActionSpace(env) => self.env_of(env).and_then(|i| env_actions[i]),
                    Units::Unknown => None,
                };
                if let Some(d) = dim {
                    attrs.push(("outputDim".to_string(), AttrValue::Int(d)));
                }
                attrs.push((
                    "outputActivation".to_string(),
                    AttrValue::Str(layer.activation.clone()),
                ));
            }
            let n = g.add_node(ty::Q_NETWORK, attrs, Some(q.line));
            if let Some(d) = dqn {
                g.add_edge(label::OWNS, d, n);
            }
            for (i, step) in self.steps.iter().enumerate() {
                let Some(s) = step_nodes[i] else { continue };
                let inner = step.loops.last();
                let predicted = self.predicts.iter().any(|(name, loops)| {
                    name == &q.name && inner.is_some_and(|l| loops.contains(l))
                });
                if predicted {
                    g.add_edge(label::FEEDS_STATE, s, n);
                    g.add_edge(label::YIELDS_ACTION, n, s);
                }
            }
            q_nodes.push((q.name.as_str(), n));
        }

        for t in &target_nets {
            let syncs: Vec<&CopyFact> = self
                .copies
                .iter()
                .filter(|c| c.dst == t.name && is_q(&c.src))
                .collect();
            let freq = syncs.iter().find_map(|c| c.guard.flatten());
            let attrs = freq.map(|f| ("syncFrequency".to_string(), AttrValue::Int(f)));
            let n = g.add_node(ty::TARGET_NETWORK, attrs, Some(t.line));
            if let Some(d) = dqn {
                g.add_edge(label::OWNS, d, n);
            }
            if let Some(&(_, q)) = q_nodes.first() {
                g.add_edge(label::PROVIDES_TARGETS, n, q);
            }
            for &(name, q) in &q_nodes {
                if syncs.iter().any(|c| c.src == name) {
                    g.add_edge(label::SYNCS_TO, q, n);
                }
            }
        }

        for x in &self.explorations {
            let mut attrs = Vec::new();
            let eps_name = ExprKind::Name(x.eps.clone());
            let probe = Expr {
                line: 0,
                kind: eps_name,
            };
            if let Some(v) = self.b.real(&probe) {
                attrs.push(("epsilon".to_string(), AttrValue::Real(v)));
            }
            let fin = self.eps_updates.iter().find_map(|u| match u {
                EpsUpdate::Final(n, v) if *n == x.eps => Some(*v),
                _ => None,
            });
            let decay = self.eps_updates.iter().find_map(|u| match u {
                EpsUpdate::Decay(n, v) if *n == x.eps => Some(*v),
                _ => None,
            });
            if let Some(v) = fin {
                attrs.push(("epsilonFinal".to_string(), AttrValue::Real(v)));
            }
            if let Some(v) = decay {
                attrs.push(("decay".to_string(), AttrValue::Real(v)));
            }
            let n = g.add_node(ty::EXPLORATION, attrs, Some(x.line));
            if let Some(d) = dqn {
                g.add_edge(label::EXPLORES, d, n);
            }
        }

        for u in &self.updates {
            let mut attrs = vec![("hasMaxTerm".to_string(), AttrValue::Bool(u.has_max))];
            if let Some(gamma) = u.gamma {
                attrs.push(("gamma".to_string(), AttrValue::Real(gamma)));
            }
            let n = g.add_node(ty::UPDATE_RULE, attrs, Some(u.line));
            if let Some(&(_, q)) = q_nodes.first() {
                g.add_edge(label::TRAINED_BY, q, n);
            }
        }

        let mut hyper: Vec<(u32, &str, i64)> = Vec::new();
        for (name, binding) in &self.b.single {
            let lower = name.to_ascii_lowercase();
            let Some(&(_, attr)) = HYPERPARAMETERS.iter().find(|(n, _)| *n == lower) else {
                continue;
            };
            if let Some(AttrValue::Int(v)) = literal(binding.value) {
                if !hyper.iter().any(|h| h.1 == attr) {
                    hyper.push((binding.line, attr, v));
                }
            }
        }
        if let Some(line) = hyper.iter().map(|h| h.0).min() {
            let attrs = hyper
                .iter()
                .map(|&(_, a, v)| (a.to_string(), AttrValue::Int(v)));
            let h = g.add_node(ty::HYPERPARAMETERS, attrs, Some(line));
            if let Some(d) = dqn {
                g.add_edge(label::CONFIGURED_BY, d, h);
            }
        }
    }
}

/// `x % C == 0` (or `not x % C`) inside a guard; `Some(None)` when C does
/// not resolve to an integer literal.
fn mod_guard(test: &Expr, b: &Bindings) -> Option<Option<i64>> {
    let mut out = None;
    test.walk(&mut |e| {
        if out.is_some() {
            return;
        }
        let modulus = |x: &Expr| match &x.kind {
            ExprKind::BinOp {
                op: BinOp::Mod,
                right,
                ..
            } => Some(b.int(right)),
            _ => None,
        };
        match &e.kind {
            ExprKind::Compare {
                left,
                ops,
                comparators,
            } if ops.len() == 1 && ops[0] == CmpOp::Eq => {
                let zero = |x: &Expr| matches!(x.kind, ExprKind::Int(0));
                if zero(&comparators[0]) {
                    out = modulus(left);
                } else if zero(left) {
                    out = modulus(&comparators[0]);
                }
            }
            ExprKind::UnaryOp {
                op: UnaryOp::Not,
                operand,
            } => out = modulus(operand),
            _ => {}
        }
    });
    out
}
