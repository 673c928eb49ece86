//! Newline-delimited JSON bridge to an external policy process.
//!
//! The simulator sends `reset` then one `obs` per step; the policy answers each
//! non-terminal message with an `act`. `close` ends the session.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{Needs, Policy, PolicyInput};
use crate::render::{ObservationStack, IMAGE_HEIGHT, IMAGE_WIDTH};
use crate::sim::{Action, StepOutcome};
use crate::Error;

pub const PROTOCOL_VERSION: &str = "vf/1";
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(10);

/// Messages sent to the policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ServerMessage {
    Reset {
        version: String,
        scenario: String,
        seed: u64,
        obs: String,
    },
    Obs {
        step: u64,
        obs: String,
        reward: f64,
        done: bool,
        cause: Option<String>,
    },
    Close,
}

/// The policy's reply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ClientMessage {
    Act { kind: String, alpha_sign: i8 },
}

impl ClientMessage {
    pub fn from_action(action: &Action) -> Self {
        let kind = match action {
            Action::Noop => "NOOP",
            Action::Turn { .. } => "TURN",
        };
        ClientMessage::Act {
            kind: kind.into(),
            alpha_sign: action.sign(),
        }
    }

    pub fn to_action(&self, alpha: f64) -> Result<Action, Error> {
        let ClientMessage::Act { kind, alpha_sign } = self;
        match (kind.as_str(), alpha_sign) {
            ("NOOP", 0) => Ok(Action::Noop),
            ("TURN", 1 | -1) => Ok(Action::turn_sign(*alpha_sign, alpha)),
            _ => Err(Error::Protocol(format!(
                "invalid action kind={kind} alpha_sign={alpha_sign}"
            ))),
        }
    }
}

pub fn encode_message<T: Serialize>(msg: &T) -> String {
    serde_json::to_string(msg).expect("message serializes")
}

pub fn parse_reply(line: &str) -> Result<ClientMessage, Error> {
    serde_json::from_str(line.trim()).map_err(|e| Error::Protocol(format!("malformed reply: {e}")))
}

pub fn parse_server(line: &str) -> Result<ServerMessage, Error> {
    serde_json::from_str(line.trim())
        .map_err(|e| Error::Protocol(format!("malformed message: {e}")))
}

/// Base64 of a 16-byte little-endian header `(frames, height, width, 1)`
/// followed by the row-major class-id tensor.
pub fn encode_obs(obs: &ObservationStack) -> String {
    let f = obs.newest();
    let mut bytes = Vec::with_capacity(16 + 3 * f.width() * f.height());
    for v in [ObservationStack::DEPTH, f.height(), f.width(), 1] {
        bytes.extend_from_slice(&(v as u32).to_le_bytes());
    }
    bytes.extend(obs.to_tensor());
    B64.encode(bytes)
}

pub fn decode_obs(text: &str) -> Result<ObservationStack, Error> {
    let bytes = B64
        .decode(text)
        .map_err(|e| Error::Protocol(format!("obs is not base64: {e}")))?;
    if bytes.len() < 16 {
        return Err(Error::Protocol("obs header truncated".into()));
    }
    let field = |i: usize| {
        u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().expect("4 bytes")) as usize
    };
    let (frames, h, w, elem) = (field(0), field(1), field(2), field(3));
    if frames != ObservationStack::DEPTH || elem != 1 {
        return Err(Error::Protocol(format!(
            "unsupported obs shape {frames}x{h}x{w}x{elem}"
        )));
    }
    ObservationStack::from_tensor(w, h, &bytes[16..])
        .ok_or_else(|| Error::Protocol("obs payload does not match header".into()))
}

/// Line-oriented duplex channel to the policy.
pub trait Transport: Send {
    fn send_line(&mut self, line: &str) -> Result<(), Error>;
    /// Next line without its terminator; `Error::PolicyTimeout` after `timeout`.
    fn recv_line(&mut self, timeout: Duration) -> Result<String, Error>;
}

fn spawn_reader<R: Read + Send + 'static>(reader: R) -> Receiver<std::io::Result<String>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in BufReader::new(reader).lines() {
            let stop = line.is_err();
            if tx.send(line).is_err() || stop {
                break;
            }
        }
    });
    rx
}

fn recv(rx: &Receiver<std::io::Result<String>>, timeout: Duration) -> Result<String, Error> {
    match rx.recv_timeout(timeout) {
        Ok(Ok(line)) => Ok(line),
        Ok(Err(e)) => Err(Error::Io(e)),
        Err(RecvTimeoutError::Timeout) => Err(Error::PolicyTimeout),
        Err(RecvTimeoutError::Disconnected) => {
            Err(Error::Protocol("policy closed the connection".into()))
        }
    }
}

/// Child process spoken to over its standard streams.
pub struct ChildTransport {
    child: Child,
    stdin: ChildStdin,
    rx: Receiver<std::io::Result<String>>,
}

impl ChildTransport {
    pub fn spawn(mut cmd: Command) -> Result<Self, Error> {
        let mut child = cmd.stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let rx = spawn_reader(child.stdout.take().expect("piped stdout"));
        Ok(Self { child, stdin, rx })
    }
}

impl Transport for ChildTransport {
    fn send_line(&mut self, line: &str) -> Result<(), Error> {
        writeln!(self.stdin, "{line}")?;
        self.stdin.flush()?;
        Ok(())
    }

    fn recv_line(&mut self, timeout: Duration) -> Result<String, Error> {
        recv(&self.rx, timeout)
    }
}

impl Drop for ChildTransport {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// TCP connection (either side may have connected).
pub struct TcpTransport {
    stream: TcpStream,
    rx: Receiver<std::io::Result<String>>,
}

impl TcpTransport {
    pub fn new(stream: TcpStream) -> Result<Self, Error> {
        stream.set_nodelay(true)?;
        let rx = spawn_reader(stream.try_clone()?);
        Ok(Self { stream, rx })
    }
}

impl Transport for TcpTransport {
    fn send_line(&mut self, line: &str) -> Result<(), Error> {
        writeln!(self.stream, "{line}")?;
        self.stream.flush()?;
        Ok(())
    }

    fn recv_line(&mut self, timeout: Duration) -> Result<String, Error> {
        recv(&self.rx, timeout)
    }
}

/// In-process transport backed by channels; the other end is a [`ChannelPeer`].
pub struct ChannelTransport {
    tx: mpsc::Sender<String>,
    rx: Receiver<std::io::Result<String>>,
}

pub struct ChannelPeer {
    pub rx: Receiver<String>,
    pub tx: mpsc::Sender<std::io::Result<String>>,
}

impl ChannelTransport {
    pub fn pair() -> (Self, ChannelPeer) {
        let (a_tx, a_rx) = mpsc::channel();
        let (b_tx, b_rx) = mpsc::channel();
        (
            Self { tx: a_tx, rx: b_rx },
            ChannelPeer { rx: a_rx, tx: b_tx },
        )
    }
}

impl Transport for ChannelTransport {
    fn send_line(&mut self, line: &str) -> Result<(), Error> {
        self.tx
            .send(line.to_string())
            .map_err(|_| Error::Protocol("policy closed the connection".into()))
    }

    fn recv_line(&mut self, timeout: Duration) -> Result<String, Error> {
        recv(&self.rx, timeout)
    }
}

/// Policy living on the far side of a [`Transport`]. It only ever sees the
/// observation tensor.
pub struct BridgePolicy {
    transport: Box<dyn Transport>,
    timeout: Duration,
    scenario: String,
    seed: u64,
}

impl BridgePolicy {
    pub fn new(transport: Box<dyn Transport>) -> Self {
        Self {
            transport,
            timeout: DEFAULT_TIMEOUT,
            scenario: String::new(),
            seed: 0,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    /// Sends `close`; the session is over afterwards.
    pub fn close(&mut self) -> Result<(), Error> {
        self.transport
            .send_line(&encode_message(&ServerMessage::Close))
    }
}

impl Policy for BridgePolicy {
    fn name(&self) -> &str {
        "bridge"
    }

    fn needs(&self) -> Needs {
        Needs {
            observation: true,
            privileged: false,
        }
    }

    fn reset(&mut self, scenario: &str, seed: u64) -> Result<(), Error> {
        self.scenario = scenario.to_string();
        self.seed = seed;
        Ok(())
    }

    fn act(&mut self, input: &PolicyInput<'_>) -> Result<Action, Error> {
        let obs = input
            .observation
            .ok_or_else(|| Error::Protocol("bridge policy needs an observation".into()))?;
        let msg = if input.step == 0 {
            ServerMessage::Reset {
                version: PROTOCOL_VERSION.into(),
                scenario: self.scenario.clone(),
                seed: self.seed,
                obs: encode_obs(obs),
            }
        } else {
            ServerMessage::Obs {
                step: input.step,
                obs: encode_obs(obs),
                reward: 0.0,
                done: false,
                cause: None,
            }
        };
        self.transport.send_line(&encode_message(&msg))?;
        let line = self.transport.recv_line(self.timeout)?;
        parse_reply(&line)?.to_action(input.alpha)
    }

    fn finish(
        &mut self,
        step: u64,
        outcome: &StepOutcome,
        observation: Option<&ObservationStack>,
    ) -> Result<(), Error> {
        let obs = observation.map(encode_obs).unwrap_or_default();
        let msg = ServerMessage::Obs {
            step,
            obs,
            reward: outcome.reward,
            done: true,
            cause: outcome.cause.map(|c| c.as_str().to_string()),
        };
        self.transport.send_line(&encode_message(&msg))
    }
}

/// Reference external policy: answers every non-terminal message with NOOP,
/// or with an invalid action kind when `malformed` is set. Returns on `close`
/// or end of input.
pub fn echo_policy_loop<R: BufRead, W: Write>(
    input: R,
    mut out: W,
    malformed: bool,
) -> Result<(), Error> {
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let reply = match parse_server(&line)? {
            ServerMessage::Close => return Ok(()),
            ServerMessage::Obs { done: true, .. } => continue,
            ServerMessage::Reset { obs, .. } | ServerMessage::Obs { obs, .. } => {
                decode_obs(&obs)?;
                if malformed {
                    r#"{"type":"act","kind":"JUMP","alpha_sign":0}"#.to_string()
                } else {
                    encode_message(&ClientMessage::from_action(&Action::Noop))
                }
            }
        };
        writeln!(out, "{reply}")?;
        out.flush()?;
    }
    Ok(())
}

/// Shape of the tensor carried by `obs`, for documentation and clients.
pub fn obs_shape() -> [usize; 4] {
    [ObservationStack::DEPTH, IMAGE_HEIGHT, IMAGE_WIDTH, 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::render::{Class, LabelImage};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_stack(seed: u64) -> ObservationStack {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut frame = || {
            let mut img = LabelImage::default();
            for r in 0..IMAGE_HEIGHT {
                for c in 0..IMAGE_WIDTH {
                    img.set(c, r, Class::ALL[rng.gen_range(0..Class::ALL.len())]);
                }
            }
            img
        };
        let mut s = ObservationStack::reset(frame());
        s.push_frame(frame());
        s.push_frame(frame());
        s
    }

    #[test]
    fn obs_round_trip_is_byte_identical() {
        for seed in 0..5 {
            let s = random_stack(seed);
            let wire = encode_obs(&s);
            let back = decode_obs(&wire).unwrap();
            assert_eq!(back, s);
            assert_eq!(encode_obs(&back), wire);
            let msg = ServerMessage::Obs {
                step: 3,
                obs: wire,
                reward: 0.0,
                done: false,
                cause: None,
            };
            let line = encode_message(&msg);
            assert_eq!(encode_message(&parse_server(&line).unwrap()), line);
        }
    }

    #[test]
    fn header_describes_shape() {
        let bytes = B64.decode(encode_obs(&random_stack(1))).unwrap();
        let fields: Vec<u32> = (0..4)
            .map(|i| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap()))
            .collect();
        assert_eq!(fields, vec![3, 84, 180, 1]);
        assert_eq!(bytes.len(), 16 + 3 * 84 * 180);
        assert_eq!(obs_shape(), [3, 84, 180, 1]);
    }

    #[test]
    fn reply_validation() {
        let ok = parse_reply(r#"{"type":"act","kind":"TURN","alpha_sign":-1}"#).unwrap();
        assert_eq!(ok.to_action(35.0).unwrap(), Action::Turn { alpha: -35.0 });
        let bad = parse_reply(r#"{"type":"act","kind":"JUMP","alpha_sign":0}"#).unwrap();
        assert!(matches!(bad.to_action(35.0), Err(Error::Protocol(_))));
        let bad = parse_reply(r#"{"type":"act","kind":"TURN","alpha_sign":0}"#).unwrap();
        assert!(bad.to_action(35.0).is_err());
        assert!(parse_reply("not json").is_err());
        assert!(decode_obs("!!!").is_err());
    }

    #[test]
    fn channel_transport_times_out() {
        let (mut t, _peer) = ChannelTransport::pair();
        assert!(matches!(
            t.recv_line(Duration::from_millis(20)),
            Err(Error::PolicyTimeout)
        ));
    }
}
