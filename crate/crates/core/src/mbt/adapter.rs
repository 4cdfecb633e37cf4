//! Tester-side connections to a SUT.

use std::collections::VecDeque;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{Shutdown, TcpStream, ToSocketAddrs};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError, TryRecvError};
use std::thread;
use std::time::Duration;

use super::sut::Sut;

/// A line-oriented connection to a SUT. Lines carry no terminator.
pub trait Adapter {
    fn send(&mut self, line: &str) -> io::Result<()>;
    /// Waits up to `timeout` for the next line; `Ok(None)` on timeout.
    fn recv(&mut self, timeout: Duration) -> io::Result<Option<String>>;
    /// The next line if one has already arrived.
    fn poll(&mut self) -> io::Result<Option<String>>;
}

fn closed() -> io::Error {
    io::Error::new(io::ErrorKind::UnexpectedEof, "connection closed by SUT")
}

/// Sends `RESET` and waits for `OK`.
pub fn reset(adapter: &mut dyn Adapter, timeout: Duration) -> io::Result<()> {
    adapter.send("RESET")?;
    match adapter.recv(timeout)? {
        Some(l) if l == "OK" => Ok(()),
        Some(l) => Err(io::Error::new(io::ErrorKind::InvalidData, format!("expected OK, got {l:?}"))),
        None => Err(io::Error::new(io::ErrorKind::TimedOut, "no reply to RESET")),
    }
}

/// Adapter over a byte stream. A reader thread forwards incoming lines over
/// a channel so that waits can time out.
pub struct WireAdapter {
    writer: Box<dyn Write + Send>,
    lines: Receiver<io::Result<String>>,
    transcript: String,
    tcp: Option<TcpStream>,
}

impl WireAdapter {
    pub fn new(reader: impl Read + Send + 'static, writer: impl Write + Send + 'static) -> Self {
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(reader).lines() {
                let stop = line.is_err();
                if tx.send(line).is_err() || stop {
                    break;
                }
            }
        });
        WireAdapter {
            writer: Box::new(writer),
            lines: rx,
            transcript: String::new(),
            tcp: None,
        }
    }

    pub fn connect(addr: impl ToSocketAddrs) -> io::Result<Self> {
        let stream = TcpStream::connect(addr)?;
        stream.set_nodelay(true)?;
        let mut a = WireAdapter::new(stream.try_clone()?, stream.try_clone()?);
        a.tcp = Some(stream);
        Ok(a)
    }

    /// Every line sent (`> `) and received (`< `), in order.
    pub fn transcript(&self) -> &str {
        &self.transcript
    }

    fn record(&mut self, dir: &str, line: &str) {
        self.transcript.push_str(dir);
        self.transcript.push_str(line);
        self.transcript.push('\n');
    }
}

impl Drop for WireAdapter {
    fn drop(&mut self) {
        if let Some(s) = &self.tcp {
            let _ = s.shutdown(Shutdown::Both);
        }
    }
}

impl Adapter for WireAdapter {
    fn send(&mut self, line: &str) -> io::Result<()> {
        self.writer.write_all(line.as_bytes())?;
        self.writer.write_all(b"\n")?;
        self.writer.flush()?;
        self.record("> ", line);
        Ok(())
    }

    fn recv(&mut self, timeout: Duration) -> io::Result<Option<String>> {
        match self.lines.recv_timeout(timeout) {
            Ok(line) => {
                let line = line?;
                self.record("< ", &line);
                Ok(Some(line))
            }
            Err(RecvTimeoutError::Timeout) => Ok(None),
            Err(RecvTimeoutError::Disconnected) => Err(closed()),
        }
    }

    fn poll(&mut self) -> io::Result<Option<String>> {
        match self.lines.try_recv() {
            Ok(line) => {
                let line = line?;
                self.record("< ", &line);
                Ok(Some(line))
            }
            Err(TryRecvError::Empty) => Ok(None),
            Err(TryRecvError::Disconnected) => Err(closed()),
        }
    }
}

/// In-process adapter that calls a [`Sut`] directly.
pub struct LocalAdapter {
    sut: Sut,
    inbox: VecDeque<String>,
    open: bool,
}

impl LocalAdapter {
    pub fn new(sut: Sut) -> Self {
        LocalAdapter {
            sut,
            inbox: VecDeque::new(),
            open: true,
        }
    }
}

impl Adapter for LocalAdapter {
    fn send(&mut self, line: &str) -> io::Result<()> {
        if !self.open {
            return Err(closed());
        }
        let reply = self.sut.handle(line);
        self.open = !reply.close;
        self.inbox.push_back(reply.line);
        Ok(())
    }

    fn recv(&mut self, _timeout: Duration) -> io::Result<Option<String>> {
        self.poll()?.map_or_else(|| Ok(None), |l| Ok(Some(l)))
    }

    fn poll(&mut self) -> io::Result<Option<String>> {
        match self.inbox.pop_front() {
            Some(l) => Ok(Some(l)),
            None if self.open => Ok(None),
            None => Err(closed()),
        }
    }
}
