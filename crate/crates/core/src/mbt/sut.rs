//! The reference SUT: the interpreter behind the adapter protocol, with
//! optional fault injection.

use std::fmt;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use super::MbtError;
use crate::dsl::{GuardExpr, ValidatedModel};
use crate::semantics::{eval_guard, eval_stmts, initial_state, PState, XRay};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Mutation {
    None,
    /// X-ray outputs (any type but Standby) go out with the plane and type
    /// in swapped positions.
    SwapOutputParams,
    /// The first statement of the named rule's do clause is removed.
    DropFirstAssignment(String),
    NegateGuard(String),
}

impl FromStr for Mutation {
    type Err = MbtError;

    fn from_str(s: &str) -> Result<Self, MbtError> {
        match s.split_once(':') {
            None if s == "none" => Ok(Mutation::None),
            None if s == "swap-output" => Ok(Mutation::SwapOutputParams),
            Some(("drop-first-assign", r)) if !r.is_empty() => Ok(Mutation::DropFirstAssignment(r.into())),
            Some(("negate-guard", r)) if !r.is_empty() => Ok(Mutation::NegateGuard(r.into())),
            _ => Err(MbtError::BadMutation(s.into())),
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mutation::None => f.write_str("none"),
            Mutation::SwapOutputParams => f.write_str("swap-output"),
            Mutation::DropFirstAssignment(r) => write!(f, "drop-first-assign:{r}"),
            Mutation::NegateGuard(r) => write!(f, "negate-guard:{r}"),
        }
    }
}

/// The model with the mutation's rule change applied.
pub fn mutate(model: &ValidatedModel, mutation: &Mutation) -> Result<ValidatedModel, MbtError> {
    let edit = |action: &str, f: &dyn Fn(&mut crate::dsl::Rule)| {
        let mut rule = model
            .rule(action)
            .ok_or_else(|| MbtError::UnknownRule(action.into()))?
            .clone();
        f(&mut rule);
        model
            .with_rule(action, rule)
            .map_err(|e| MbtError::BadMutation(e.to_string()))
    };
    match mutation {
        Mutation::None | Mutation::SwapOutputParams => Ok(model.clone()),
        Mutation::DropFirstAssignment(a) => edit(a, &|r| {
            if !r.do_clause.is_empty() {
                r.do_clause.remove(0);
            }
        }),
        Mutation::NegateGuard(a) => edit(a, &|r| r.guard = GuardExpr::negate(r.guard.clone())),
    }
}

/// One protocol endpoint's worth of SUT state.
#[derive(Debug, Clone)]
pub struct Sut {
    model: ValidatedModel,
    swap: bool,
    state: PState,
}

/// A reply line (without the line feed) and whether to hang up after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reply {
    pub line: String,
    pub close: bool,
}

impl Sut {
    pub fn new(model: &ValidatedModel, mutation: &Mutation) -> Result<Self, MbtError> {
        let model = mutate(model, mutation)?;
        let state = initial_state(&model);
        Ok(Sut {
            model,
            swap: *mutation == Mutation::SwapOutputParams,
            state,
        })
    }

    pub fn state(&self) -> &PState {
        &self.state
    }

    pub fn reset(&mut self) {
        self.state = initial_state(&self.model);
    }

    /// Applies a stimulus. A rule whose guard is false leaves the state as
    /// it is, so the SUT is input-enabled.
    pub fn stimulate(&mut self, action: &str) -> Option<(String, String)> {
        let rule = self.model.rule(action)?;
        if eval_guard(&rule.guard, &self.state) {
            self.state = eval_stmts(&rule.do_clause, &self.state);
        }
        let (x, p) = (self.state.out_type.to_string(), self.state.out_plane.to_string());
        Some(if self.swap && self.state.out_type != XRay::Standby { (p, x) } else { (x, p) })
    }

    pub fn handle(&mut self, line: &str) -> Reply {
        let err = |m: String| Reply {
            line: format!("ERR {m}"),
            close: true,
        };
        let ok = |line: String| Reply { line, close: false };
        if line == "RESET" {
            self.reset();
            return ok("OK".into());
        }
        match line.strip_prefix("STIM ") {
            Some(a) if !a.is_empty() && !a.contains(' ') => match self.stimulate(a) {
                Some((x, p)) => ok(format!("RESP Output {x} {p}")),
                None => err(format!("unknown action {a}")),
            },
            _ => err("malformed request".into()),
        }
    }
}

/// Serves one connection until the peer hangs up or breaks the protocol.
pub fn serve_stream(sut: &mut Sut, reader: impl BufRead, mut writer: impl Write) -> io::Result<()> {
    for line in reader.lines() {
        let line = line?;
        let reply = sut.handle(line.strip_suffix('\r').unwrap_or(&line));
        writer.write_all(reply.line.as_bytes())?;
        writer.write_all(b"\n")?;
        writer.flush()?;
        if reply.close {
            break;
        }
    }
    Ok(())
}

const BUSY_GRACE: Duration = Duration::from_millis(500);

/// A background TCP SUT. Each connection starts from the initial state; a
/// connection arriving while another is served for longer than a short grace
/// period gets `ERR busy` and is closed.
pub struct SutServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl SutServer {
    pub fn start(model: &ValidatedModel, mutation: &Mutation, addr: impl std::net::ToSocketAddrs) -> Result<Self, MbtError> {
        let template = Sut::new(model, mutation)?;
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let busy = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let handle = thread::spawn(move || {
            for conn in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(mut stream) = conn else { continue };
                // A client that reconnects right after closing may race the
                // previous session's teardown.
                let deadline = Instant::now() + BUSY_GRACE;
                let mut acquired = !busy.swap(true, Ordering::SeqCst);
                while !acquired && Instant::now() < deadline {
                    thread::sleep(Duration::from_millis(2));
                    acquired = !busy.swap(true, Ordering::SeqCst);
                }
                if !acquired {
                    let _ = stream.write_all(b"ERR busy\n");
                    continue;
                }
                let mut sut = template.clone();
                let busy = busy.clone();
                thread::spawn(move || {
                    let _ = stream.set_nodelay(true);
                    if let Ok(read_half) = stream.try_clone() {
                        let _ = serve_stream(&mut sut, BufReader::new(read_half), &stream);
                    }
                    busy.store(false, Ordering::SeqCst);
                });
            }
        });
        Ok(SutServer {
            addr,
            stop,
            handle: Some(handle),
        })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Serves forever.
    pub fn join(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }

    pub fn shutdown(mut self) {
        self.stop_accepting();
    }

    fn stop_accepting(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // Wake the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for SutServer {
    fn drop(&mut self) {
        if self.handle.is_some() {
            self.stop_accepting();
        }
    }
}

/// Runs the SUT server on `addr` until the process ends.
pub fn serve_sut(model: &ValidatedModel, mutation: &Mutation, addr: impl std::net::ToSocketAddrs) -> Result<(), MbtError> {
    SutServer::start(model, mutation, addr)?.join();
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl;

    #[test]
    fn protocol_examples() {
        let mut sut = Sut::new(&dsl::fixture(), &Mutation::None).unwrap();
        assert_eq!(sut.handle("STIM FRFluoOn").line, "RESP Output Fluo FR");
        assert_eq!(sut.handle("RESET"), Reply { line: "OK".into(), close: false });
        assert_eq!(*sut.state(), initial_state(&dsl::fixture()));
        let r = sut.handle("STIM UnknownAction");
        assert!(r.line.starts_with("ERR ") && r.close);
        assert!(sut.handle("STIM  FRFluoOn").close);
        assert!(sut.handle("HELLO").close);
    }

    #[test]
    fn disabled_stimulus_repeats_current_output() {
        let mut sut = Sut::new(&dsl::fixture(), &Mutation::None).unwrap();
        assert_eq!(sut.handle("STIM FRFluoOff").line, "RESP Output Standby None");
        assert_eq!(*sut.state(), initial_state(&dsl::fixture()));
    }

    #[test]
    fn mutation_specs() {
        for s in ["none", "swap-output", "drop-first-assign:FRFluoOn", "negate-guard:StartCond"] {
            assert_eq!(s.parse::<Mutation>().unwrap().to_string(), s);
        }
        for s in ["", "swap", "negate-guard:", "drop-first-assign"] {
            assert!(s.parse::<Mutation>().is_err(), "{s}");
        }
        assert!(matches!(
            Sut::new(&dsl::fixture(), &Mutation::NegateGuard("Pedal".into())),
            Err(MbtError::UnknownRule(_))
        ));
    }

    #[test]
    fn swap_only_affects_xray_outputs() {
        let mut sut = Sut::new(&dsl::fixture(), &Mutation::SwapOutputParams).unwrap();
        assert_eq!(sut.handle("STIM StartCond").line, "RESP Output Standby None");
        sut.handle("RESET");
        assert_eq!(sut.handle("STIM FRFluoOn").line, "RESP Output FR Fluo");
    }
}
