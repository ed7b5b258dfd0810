//! Length-prefixed epsilon protocol for out-of-process noise predictors.
//!
//! Every message is `u32 msg_type | u32 step_index | u32 payload_len | payload`,
//! little-endian. Requests and responses carry an LTNS tensor; error messages
//! carry a UTF-8 reason. A connection is one duplex byte stream (a socket or a
//! child process's stdin/stdout) and responses arrive in request order.

use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::TcpStream;
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::ltns;
use crate::predictor::NoisePredictor;
use crate::tensor::LatentTensor;

pub const MSG_REQUEST: u32 = 1;
pub const MSG_RESPONSE: u32 = 2;
pub const MSG_ERROR: u32 = 3;

/// Upper bound on a single payload, 1 GiB.
const MAX_PAYLOAD: u32 = 1 << 30;

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub msg_type: u32,
    pub step_index: u32,
    pub payload: Vec<u8>,
}

impl Message {
    pub fn request(step: u32, x: &LatentTensor) -> Self {
        Self {
            msg_type: MSG_REQUEST,
            step_index: step,
            payload: ltns::encode(x),
        }
    }

    pub fn response(step: u32, eps: &LatentTensor) -> Self {
        Self {
            msg_type: MSG_RESPONSE,
            step_index: step,
            payload: ltns::encode(eps),
        }
    }

    pub fn error(step: u32, reason: &str) -> Self {
        Self {
            msg_type: MSG_ERROR,
            step_index: step,
            payload: reason.as_bytes().to_vec(),
        }
    }
}

pub fn write_message<W: Write + ?Sized>(w: &mut W, m: &Message) -> io::Result<()> {
    let len = u32::try_from(m.payload.len())
        .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "payload too large"))?;
    w.write_all(&m.msg_type.to_le_bytes())?;
    w.write_all(&m.step_index.to_le_bytes())?;
    w.write_all(&len.to_le_bytes())?;
    w.write_all(&m.payload)?;
    w.flush()
}

/// Read one message; `Ok(None)` on a clean end of stream before a header.
pub fn read_message<R: Read + ?Sized>(r: &mut R) -> io::Result<Option<Message>> {
    let mut header = [0u8; 12];
    let mut filled = 0;
    while filled < header.len() {
        match r.read(&mut header[filled..])? {
            0 if filled == 0 => return Ok(None),
            0 => return Err(io::ErrorKind::UnexpectedEof.into()),
            n => filled += n,
        }
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().unwrap());
    let (msg_type, step_index, len) = (word(0), word(4), word(8));
    if len > MAX_PAYLOAD {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("payload length {len} exceeds limit"),
        ));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok(Some(Message {
        msg_type,
        step_index,
        payload,
    }))
}

/// Answer requests on one connection until the peer closes it.
///
/// Malformed requests and unknown message types get an error reply and the
/// connection stays open.
pub fn serve_connection(
    reader: &mut impl Read,
    writer: &mut impl Write,
    pred: &dyn NoisePredictor,
) -> io::Result<()> {
    while let Some(msg) = read_message(reader)? {
        let reply = match msg.msg_type {
            MSG_REQUEST => match ltns::decode(&msg.payload) {
                Ok(x) => match pred.predict(&x, msg.step_index as usize) {
                    Ok(eps) => Message::response(msg.step_index, &eps),
                    Err(e) => Message::error(msg.step_index, &e.to_string()),
                },
                Err(e) => Message::error(msg.step_index, &format!("malformed tensor: {e}")),
            },
            other => Message::error(msg.step_index, &format!("unknown msg_type {other}")),
        };
        write_message(writer, &reply)?;
    }
    Ok(())
}

enum Transport {
    Tcp {
        addr: String,
        reader: BufReader<TcpStream>,
        writer: BufWriter<TcpStream>,
    },
    Child {
        child: Child,
        reader: BufReader<ChildStdout>,
        writer: BufWriter<ChildStdin>,
    },
}

impl Transport {
    fn tcp(addr: &str) -> Result<Self> {
        let stream = TcpStream::connect(addr)
            .map_err(|e| Error::Protocol(format!("connect {addr}: {e}")))?;
        stream.set_nodelay(true).ok();
        let clone = stream
            .try_clone()
            .map_err(|e| Error::Protocol(format!("clone socket: {e}")))?;
        Ok(Transport::Tcp {
            addr: addr.to_string(),
            reader: BufReader::new(clone),
            writer: BufWriter::new(stream),
        })
    }

    fn exchange(&mut self, m: &Message) -> io::Result<Option<Message>> {
        let (reader, writer): (&mut dyn Read, &mut dyn Write) = match self {
            Transport::Tcp { reader, writer, .. } => (reader, writer),
            Transport::Child { reader, writer, .. } => (reader, writer),
        };
        write_message(writer, m)?;
        read_message(reader)
    }
}

impl Drop for Transport {
    fn drop(&mut self) {
        if let Transport::Child { child, .. } = self {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// Predictor backed by a remote service. Calls are single-flight per connection.
pub struct RemotePredictor {
    endpoint: String,
    transport: Mutex<Transport>,
}

impl RemotePredictor {
    pub fn connect(addr: &str) -> Result<Self> {
        Ok(Self {
            endpoint: format!("tcp:{addr}"),
            transport: Mutex::new(Transport::tcp(addr)?),
        })
    }

    /// Spawn `cmd` (split on whitespace) and speak the protocol over its stdio.
    pub fn spawn(cmd: &str) -> Result<Self> {
        let mut parts = cmd.split_whitespace();
        let program = parts
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty predictor command".into()))?;
        let mut child = Command::new(program)
            .args(parts)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::Protocol(format!("spawn {cmd:?}: {e}")))?;
        let writer = BufWriter::new(child.stdin.take().expect("piped stdin"));
        let reader = BufReader::new(child.stdout.take().expect("piped stdout"));
        Ok(Self {
            endpoint: format!("exec:{cmd}"),
            transport: Mutex::new(Transport::Child {
                child,
                reader,
                writer,
            }),
        })
    }

    fn call(&self, x: &LatentTensor, step: usize) -> Result<LatentTensor> {
        let step32 = u32::try_from(step)
            .map_err(|_| Error::InvalidArgument(format!("step {step} exceeds u32")))?;
        let req = Message::request(step32, x);
        let mut t = self
            .transport
            .lock()
            .map_err(|_| Error::Protocol("predictor connection poisoned".into()))?;
        let reply = match t.exchange(&req) {
            Ok(Some(m)) => m,
            first => {
                // One reconnect attempt for socket transports after a dropped connection.
                let reason = match first {
                    Err(e) => e.to_string(),
                    _ => "connection closed".to_string(),
                };
                let addr = match &*t {
                    Transport::Tcp { addr, .. } => addr.clone(),
                    Transport::Child { .. } => {
                        return Err(Error::Predictor { step, reason });
                    }
                };
                *t = Transport::tcp(&addr)?;
                t.exchange(&req)
                    .map_err(|e| Error::Predictor {
                        step,
                        reason: e.to_string(),
                    })?
                    .ok_or_else(|| Error::Predictor {
                        step,
                        reason: "connection closed".into(),
                    })?
            }
        };
        drop(t);
        match reply.msg_type {
            MSG_RESPONSE => {
                if reply.step_index != step32 {
                    return Err(Error::Protocol(format!(
                        "response step {} does not echo request step {step}",
                        reply.step_index
                    )));
                }
                let eps = ltns::decode(&reply.payload)?;
                if eps.dims() != x.dims() {
                    return Err(Error::Protocol(format!(
                        "response dims {:?} differ from request {:?}",
                        eps.dims(),
                        x.dims()
                    )));
                }
                Ok(eps)
            }
            MSG_ERROR => Err(Error::Predictor {
                step,
                reason: String::from_utf8_lossy(&reply.payload).into_owned(),
            }),
            other => Err(Error::Protocol(format!("unexpected msg_type {other}"))),
        }
    }
}

impl NoisePredictor for RemotePredictor {
    fn predict(&self, x: &LatentTensor, step: usize) -> Result<LatentTensor> {
        self.call(x, step)
    }

    fn describe(&self) -> String {
        self.endpoint.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::{FrozenRandomPredictor, LinearPredictor};
    use std::io::Cursor;
    use std::net::TcpListener;

    #[test]
    fn framing_layout() {
        let m = Message::error(7, "no");
        let mut buf = Vec::new();
        write_message(&mut buf, &m).unwrap();
        assert_eq!(&buf[0..4], &3u32.to_le_bytes());
        assert_eq!(&buf[4..8], &7u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[12..], b"no");
        assert_eq!(read_message(&mut Cursor::new(buf)).unwrap(), Some(m));
    }

    #[test]
    fn server_replies_and_survives_bad_requests() {
        let x = LatentTensor::from_fn(&[2, 3, 3], |i| i as f64 * 0.25);
        let mut input = Vec::new();
        write_message(&mut input, &Message { msg_type: 9, step_index: 1, payload: vec![] }).unwrap();
        write_message(&mut input, &Message { msg_type: MSG_REQUEST, step_index: 2, payload: b"junk".to_vec() }).unwrap();
        write_message(&mut input, &Message::request(4, &x)).unwrap();
        let mut out = Vec::new();
        let pred = LinearPredictor::new(vec![2.0]).unwrap();
        serve_connection(&mut Cursor::new(input), &mut out, &pred).unwrap();
        let mut r = Cursor::new(out);
        let a = read_message(&mut r).unwrap().unwrap();
        assert_eq!((a.msg_type, a.step_index), (MSG_ERROR, 1));
        let b = read_message(&mut r).unwrap().unwrap();
        assert_eq!((b.msg_type, b.step_index), (MSG_ERROR, 2));
        let c = read_message(&mut r).unwrap().unwrap();
        assert_eq!((c.msg_type, c.step_index), (MSG_RESPONSE, 4));
        assert_eq!(ltns::decode(&c.payload).unwrap(), x.scale(2.0));
        assert!(read_message(&mut r).unwrap().is_none());
    }

    #[test]
    fn remote_predictor_over_tcp_matches_local() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap().to_string();
        let server = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = stream.try_clone().unwrap();
            let mut writer = stream;
            serve_connection(&mut reader, &mut writer, &FrozenRandomPredictor::new(5)).unwrap();
        });
        let remote = RemotePredictor::connect(&addr).unwrap();
        // f32-representable input so the wire encoding is lossless.
        let x = LatentTensor::from_fn(&[4, 4, 4], |i| (i as f32 * 0.1).sin() as f64);
        let got = remote.predict(&x, 3).unwrap();
        let want = FrozenRandomPredictor::new(5).predict(&x, 3).unwrap();
        assert_eq!(got.dims(), x.dims());
        for (g, w) in got.data().iter().zip(want.data()) {
            assert_eq!(*g, *w as f32 as f64);
        }
        drop(remote);
        server.join().unwrap();
    }
}
