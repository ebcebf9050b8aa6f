//! SHA-256 digests computed while data streams through.

use std::io::{self, Read, Write};
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

/// Digest and length of a byte stream.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Fingerprint {
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Default)]
struct State {
    hasher: Sha256,
    bytes: u64,
}

/// Handle for reading the digest of a [`HashingReader`] that has been moved
/// elsewhere (for example into a decoder).
#[derive(Clone, Default)]
pub struct DigestHandle(Arc<Mutex<State>>);

impl DigestHandle {
    /// Digest of everything read so far.
    pub fn fingerprint(&self) -> Fingerprint {
        let state = self.0.lock().expect("digest lock");
        Fingerprint {
            sha256: hex(&state.hasher.clone().finalize()),
            bytes: state.bytes,
        }
    }
}

/// Hashes every byte read from the inner reader. Wrap it in a
/// `BufReader` for line-oriented access.
pub struct HashingReader<R> {
    inner: R,
    state: DigestHandle,
}

impl<R> HashingReader<R> {
    pub fn new(inner: R) -> (Self, DigestHandle) {
        let state = DigestHandle::default();
        (
            HashingReader {
                inner,
                state: state.clone(),
            },
            state,
        )
    }

    fn absorb(&self, data: &[u8]) {
        let mut s = self.state.0.lock().expect("digest lock");
        s.hasher.update(data);
        s.bytes += data.len() as u64;
    }
}

impl<R: Read> Read for HashingReader<R> {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = self.inner.read(buf)?;
        self.absorb(&buf[..n]);
        Ok(n)
    }
}

/// Hashes every byte written through it.
pub struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> HashingWriter<W> {
    pub fn new(inner: W) -> Self {
        HashingWriter {
            inner,
            hasher: Sha256::new(),
            bytes: 0,
        }
    }

    pub fn finish(mut self) -> io::Result<(W, Fingerprint)> {
        self.inner.flush()?;
        let fp = Fingerprint {
            sha256: hex(&self.hasher.finalize()),
            bytes: self.bytes,
        };
        Ok((self.inner, fp))
    }
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

pub fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write as _;
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Digest of a whole byte slice.
pub fn fingerprint_of(data: &[u8]) -> Fingerprint {
    Fingerprint {
        sha256: hex(&Sha256::digest(data)),
        bytes: data.len() as u64,
    }
}
