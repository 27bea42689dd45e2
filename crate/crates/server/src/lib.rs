//! Interactive proving over HTTP. Each session holds a stack of immutable
//! proof states; every request is logged so that a server can be rebuilt
//! by replaying the log.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::State;
use axum::routing::post;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio::sync::Mutex;

use dl_core::arith::Budget;
use dl_core::kernel::{check_dlp, to_dlp, Args, KernelError, Position, ProofState, Rule, AXIOMS};
use dl_core::parser::{parse_formula, parse_problem, parse_term};
use dl_core::sim::{falsify, Falsified, SimConfig};
use dl_core::syntax::Var;
use dl_core::tactics::{auto_goal, positions, di_prove, di_search, diff_saturate, loop_invariant, AutoConfig, SearchConfig};

pub const PROTOCOL: u32 = 1;

/// Rule inputs with formulas and terms in concrete syntax.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct ArgsText {
    pub position: Option<Position>,
    pub formulas: Vec<String>,
    pub terms: Vec<String>,
    pub vars: Vec<String>,
    pub reverse: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Message {
    LoadProblem { text: String },
    GetState,
    ApplyAxiom { goal_id: usize, axiom_id: String, position: Position, #[serde(default)] inst: ArgsText },
    ApplyRule { goal_id: usize, rule_id: String, #[serde(default)] args: ArgsText },
    ApplyTactic { goal_id: usize, name: String, #[serde(default)] args: Vec<String> },
    CloseArith { goal_id: usize },
    Falsify { goal_id: usize, #[serde(default = "default_budget")] budget: usize },
    Undo,
    ExportProof,
}

fn default_budget() -> usize {
    500
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Request {
    #[serde(default)]
    pub session: Option<u64>,
    pub message: Message,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorBody {
    pub kind: String,
    pub message: String,
}

fn error(kind: &str, message: impl ToString) -> ErrorBody {
    ErrorBody { kind: kind.into(), message: message.to_string() }
}

fn kernel_error(e: &KernelError) -> ErrorBody {
    let kind = match e {
        KernelError::UnknownGoal(_) => "UnknownGoal",
        KernelError::UnknownRule(_) => "UnknownRule",
        KernelError::Position(_) => "PositionError",
        KernelError::NoMatch(_) => "NoMatch",
        KernelError::Shape(_) => "ShapeError",
        KernelError::SideCondition(_) => "SideConditionError",
        KernelError::NotClosed(_) => "NotClosed",
        KernelError::Arith(_) => "ArithError",
    };
    error(kind, e)
}

/// One proof attempt: the states after each successful step.
#[derive(Clone, Debug, Default)]
pub struct Session {
    history: Vec<ProofState>,
}

const HINTS: &[&str] = &[
    "close", "impR", "andR", "orR", "notR", "allR", "equivR", "andL", "orL", "notL", "existsL", "equivL", "[;]", "[++]",
    "[?]", "[:=]", "[*]", "<>", "DI", "DW", "DV",
];

impl Session {
    pub fn state(&self) -> Option<&ProofState> {
        self.history.last()
    }

    fn current(&self) -> Result<&ProofState, ErrorBody> {
        self.state().ok_or_else(|| error("NoProblem", "no problem loaded"))
    }

    fn push(&mut self, ps: ProofState) {
        self.history.push(ps);
    }

    /// Applies one message. Failed messages leave the session unchanged.
    pub fn handle(&mut self, msg: &Message) -> Result<Value, ErrorBody> {
        let budget = Budget::unlimited();
        match msg {
            Message::LoadProblem { text } => {
                let p = parse_problem(text).map_err(|e| error("ParseError", e))?;
                self.history = vec![ProofState::init(p.conjecture())];
                Ok(Value::Null)
            }
            Message::GetState => Ok(Value::Null),
            Message::ApplyAxiom { goal_id, axiom_id, position, inst } => {
                if !AXIOMS.contains(&dl_core::kernel::canonical_name(axiom_id)) {
                    return Err(error("UnknownRule", format!("{axiom_id} is not an axiom")));
                }
                let mut args = parse_args(inst)?;
                args.pos = Some(position.clone());
                let next = self.current()?.apply(*goal_id, Rule::new(axiom_id, args), &budget).map_err(|e| kernel_error(&e))?;
                self.push(next);
                Ok(Value::Null)
            }
            Message::ApplyRule { goal_id, rule_id, args } => {
                let args = parse_args(args)?;
                let next = self.current()?.apply(*goal_id, Rule::new(rule_id, args), &budget).map_err(|e| kernel_error(&e))?;
                self.push(next);
                Ok(Value::Null)
            }
            Message::CloseArith { goal_id } => {
                let next = self
                    .current()?
                    .apply(*goal_id, Rule::new("arith", Args::default()), &budget)
                    .map_err(|e| kernel_error(&e))?;
                self.push(next);
                Ok(Value::Null)
            }
            Message::ApplyTactic { goal_id, name, args } => {
                let ps = self.current()?;
                ps.goal(*goal_id).map_err(|e| kernel_error(&e))?;
                let formulas = args
                    .iter()
                    .map(|t| parse_formula(t).map_err(|e| error("ParseError", format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                let cfg = AutoConfig::default();
                let tactic = |e: dl_core::tactics::TacticError| error("TacticError", e);
                let next = match (name.as_str(), formulas.as_slice()) {
                    ("auto", []) => auto_goal(ps, *goal_id, &cfg),
                    ("loop", [j]) => loop_invariant(ps, *goal_id, j).map_err(tactic)?,
                    ("di", fs) if fs.len() <= 1 => di_prove(ps, *goal_id, fs.first(), &cfg).map_err(tactic)?,
                    ("saturate", cuts) => diff_saturate(ps, *goal_id, cuts, &cfg).map_err(tactic)?,
                    ("search", []) => {
                        let found = di_search(ps.goal(*goal_id).expect("checked"), &SearchConfig::default());
                        return Ok(json!({"candidates": found.iter().map(|f| f.to_string()).collect::<Vec<_>>()}));
                    }
                    _ => return Err(error("UnknownTactic", format!("{name} with {} arguments", args.len()))),
                };
                self.push(next);
                Ok(Value::Null)
            }
            Message::Falsify { goal_id, budget } => {
                let ps = self.current()?;
                let s = ps.goal(*goal_id).map_err(|e| kernel_error(&e))?;
                let cfg = SimConfig { samples: *budget, ..SimConfig::default() };
                Ok(match falsify(&s.to_formula(), &cfg) {
                    Falsified::Counterexample(c) => json!({"counterexample": c}),
                    Falsified::Unknown { samples } => json!({"unknown": {"samples": samples}}),
                })
            }
            Message::Undo => {
                if self.history.len() <= 1 {
                    return Err(error("NothingToUndo", "no step to undo"));
                }
                self.history.pop();
                Ok(Value::Null)
            }
            Message::ExportProof => {
                let ps = self.current()?;
                if !ps.is_proved() {
                    return Err(error("OpenGoals", format!("{} goals are open", ps.open_goals().len())));
                }
                let text = to_dlp(ps);
                check_dlp(&text).map_err(|e| error("ReplayError", e))?;
                Ok(json!({"proof": text}))
            }
        }
    }

    /// Open goals with their sequents and the rules that apply without
    /// further input.
    pub fn view(&self) -> Value {
        let Some(ps) = self.state() else { return Value::Null };
        let goals: Vec<Value> = ps
            .open_goals()
            .into_iter()
            .map(|g| {
                let s = ps.goal(g).expect("open");
                let budget = Budget::unlimited();
                let mut hints: Vec<&str> = Vec::new();
                let mut moves: Vec<Value> = Vec::new();
                for h in HINTS.iter().copied() {
                    if AXIOMS.contains(&h) {
                        for (pos, _) in positions(s) {
                            let args = Args { pos: Some(pos.clone()), ..Args::default() };
                            if ps.apply(g, Rule::new(h, args), &budget).is_ok() {
                                moves.push(json!({"rule": h, "position": pos}));
                                if !hints.contains(&h) {
                                    hints.push(h);
                                }
                            }
                        }
                    } else if ps.apply(g, Rule::new(h, Args::default()), &budget).is_ok() {
                        hints.push(h);
                    }
                }
                json!({
                    "id": g,
                    "sequent": s.to_string(),
                    "ante": s.ante.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "succ": s.succ.iter().map(|f| f.to_string()).collect::<Vec<_>>(),
                    "hints": hints,
                    "moves": moves,
                })
            })
            .collect();
        json!({"conjecture": ps.conjecture.to_string(), "nodes": ps.nodes.len(), "proved": ps.is_proved(), "goals": goals})
    }
}

fn parse_args(a: &ArgsText) -> Result<Args, ErrorBody> {
    let perr = |t: &String, e: dl_core::parser::ParseError| error("ParseError", format!("{t:?}: {e}"));
    Ok(Args {
        pos: a.position.clone(),
        formulas: a.formulas.iter().map(|t| parse_formula(t).map_err(|e| perr(t, e))).collect::<Result<_, _>>()?,
        terms: a.terms.iter().map(|t| parse_term(t).map_err(|e| perr(t, e))).collect::<Result<_, _>>()?,
        vars: a.vars.iter().map(Var::new).collect(),
        reverse: a.reverse,
    })
}

/// All sessions and the log of every request received.
#[derive(Debug, Default)]
pub struct Server {
    sessions: BTreeMap<u64, Session>,
    next: u64,
    log: Vec<Request>,
}

impl Server {
    pub fn new() -> Server {
        Server::default()
    }

    /// Rebuilds a server from a request log.
    pub fn replay(log: &[Request]) -> Server {
        let mut s = Server::new();
        for r in log {
            s.handle(r.clone());
        }
        s
    }

    pub fn log(&self) -> &[Request] {
        &self.log
    }

    pub fn session(&self, id: u64) -> Option<&Session> {
        self.sessions.get(&id)
    }

    pub fn handle(&mut self, req: Request) -> Value {
        self.log.push(req.clone());
        let id = match (req.session, &req.message) {
            (Some(id), _) if self.sessions.contains_key(&id) => id,
            (None, Message::LoadProblem { .. }) => {
                let id = self.next;
                self.next += 1;
                self.sessions.insert(id, Session::default());
                id
            }
            (Some(id), _) => return json!({"version": PROTOCOL, "ok": false, "error": error("UnknownSession", id)}),
            (None, _) => {
                return json!({"version": PROTOCOL, "ok": false, "error": error("UnknownSession", "no session given")})
            }
        };
        let session = self.sessions.get_mut(&id).expect("session exists");
        let result = session.handle(&req.message);
        let state = session.view();
        match result {
            Ok(result) => json!({"version": PROTOCOL, "ok": true, "session": id, "result": result, "state": state}),
            Err(e) => json!({"version": PROTOCOL, "ok": false, "session": id, "error": e, "state": state}),
        }
    }
}

/// A server with an optional file receiving each request as one JSON line.
#[derive(Debug, Default)]
pub struct App {
    pub server: Server,
    pub sink: Option<std::fs::File>,
}

pub type Shared = Arc<Mutex<App>>;

async fn endpoint(State(app): State<Shared>, Json(req): Json<Request>) -> Json<Value> {
    use std::io::Write;
    let mut app = app.lock().await;
    if let Some(f) = app.sink.as_mut() {
        if let Ok(line) = serde_json::to_string(&req) {
            let _ = writeln!(f, "{line}");
        }
    }
    Json(app.server.handle(req))
}

/// The single JSON endpoint at `/`.
pub fn router(server: Shared) -> Router {
    Router::new().route("/", post(endpoint)).with_state(server)
}
