//! Append-only record file with a running hash chain.
//!
//! ```text
//! record := len: u32 BE | payload: [u8; len] | hash: [u8; 32]
//! hash_i := SHA-256(hash_{i-1} | payload_i),   hash_{-1} = [0; 32]
//! ```

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub const HASH_LEN: usize = 32;
pub type ChainHash = [u8; HASH_LEN];
pub const GENESIS: ChainHash = [0; HASH_LEN];

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("corrupt record {index}: {reason}")]
    CorruptRecord { index: usize, reason: &'static str },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn chain_hash(prev: &ChainHash, payload: &[u8]) -> ChainHash {
    let mut h = Sha256::new();
    h.update(prev);
    h.update(payload);
    h.finalize().into()
}

/// Serialize payloads into the record format, starting from `head`.
pub fn encode_records<'a>(
    head: ChainHash,
    payloads: impl IntoIterator<Item = &'a [u8]>,
) -> (Vec<u8>, ChainHash) {
    let mut out = Vec::new();
    let mut head = head;
    for p in payloads {
        head = chain_hash(&head, p);
        write_record(&mut out, p, &head);
    }
    (out, head)
}

fn write_record(out: &mut Vec<u8>, payload: &[u8], hash: &ChainHash) {
    let len = u32::try_from(payload.len()).expect("record longer than 4 GiB");
    out.extend_from_slice(&len.to_be_bytes());
    out.extend_from_slice(payload);
    out.extend_from_slice(hash);
}

/// Parse and verify a record stream. Returns the payloads and the final chain head.
pub fn decode_records(bytes: &[u8]) -> Result<(Vec<Vec<u8>>, ChainHash), StoreError> {
    let mut head = GENESIS;
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < bytes.len() {
        let index = out.len();
        let corrupt = |reason| StoreError::CorruptRecord { index, reason };
        let len_bytes = bytes.get(pos..pos + 4).ok_or(corrupt("truncated length"))?;
        let len = u32::from_be_bytes(len_bytes.try_into().expect("4 bytes")) as usize;
        let payload = bytes
            .get(pos + 4..pos + 4 + len)
            .ok_or(corrupt("truncated payload"))?;
        let stored = bytes
            .get(pos + 4 + len..pos + 4 + len + HASH_LEN)
            .ok_or(corrupt("truncated hash"))?;
        let expected = chain_hash(&head, payload);
        if stored != expected {
            return Err(corrupt("hash chain break"));
        }
        head = expected;
        out.push(payload.to_vec());
        pos += 4 + len + HASH_LEN;
    }
    Ok((out, head))
}

/// File-backed append-only store.
#[derive(Debug)]
pub struct RecordFile {
    path: PathBuf,
    file: File,
    head: ChainHash,
    len: usize,
}

impl RecordFile {
    /// Open (or create) `path`, verify every existing record, and return the
    /// store positioned for appending together with the replayed payloads.
    pub fn open(path: impl AsRef<Path>) -> Result<(Self, Vec<Vec<u8>>), StoreError> {
        let path = path.as_ref().to_path_buf();
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        let mut bytes = Vec::new();
        file.read_to_end(&mut bytes)?;
        let (payloads, head) = decode_records(&bytes)?;
        let len = payloads.len();
        Ok((
            Self {
                path,
                file,
                head,
                len,
            },
            payloads,
        ))
    }

    pub fn append(&mut self, payload: &[u8]) -> Result<(), StoreError> {
        let hash = chain_hash(&self.head, payload);
        let mut rec = Vec::with_capacity(payload.len() + 4 + HASH_LEN);
        write_record(&mut rec, payload, &hash);
        self.file.write_all(&rec)?;
        self.file.flush()?;
        self.head = hash;
        self.len += 1;
        Ok(())
    }

    pub fn head(&self) -> ChainHash {
        self.head
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_stream_is_empty() {
        let (payloads, head) = decode_records(&[]).unwrap();
        assert!(payloads.is_empty());
        assert_eq!(head, GENESIS);
    }

    #[test]
    fn roundtrip_and_every_flipped_byte_is_caught() {
        let items: Vec<&[u8]> = vec![b"alpha", b"", b"gamma-gamma"];
        let (bytes, head) = encode_records(GENESIS, items.iter().copied());
        let (back, back_head) = decode_records(&bytes).unwrap();
        assert_eq!(back, items.iter().map(|s| s.to_vec()).collect::<Vec<_>>());
        assert_eq!(head, back_head);
        for i in 0..bytes.len() {
            let mut bad = bytes.clone();
            bad[i] ^= 0x01;
            assert!(
                matches!(decode_records(&bad), Err(StoreError::CorruptRecord { .. })),
                "flip at {i} undetected"
            );
        }
    }

    #[test]
    fn file_append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.bin");
        {
            let (mut f, replay) = RecordFile::open(&path).unwrap();
            assert!(replay.is_empty());
            f.append(b"one").unwrap();
            f.append(b"two").unwrap();
        }
        let (mut f, replay) = RecordFile::open(&path).unwrap();
        assert_eq!(replay, vec![b"one".to_vec(), b"two".to_vec()]);
        f.append(b"three").unwrap();
        drop(f);
        let (_, replay) = RecordFile::open(&path).unwrap();
        assert_eq!(replay.len(), 3);

        let mut raw = std::fs::read(&path).unwrap();
        raw[5] ^= 0xff;
        std::fs::write(&path, raw).unwrap();
        assert!(matches!(
            RecordFile::open(&path),
            Err(StoreError::CorruptRecord { index: 0, .. })
        ));
    }
}
