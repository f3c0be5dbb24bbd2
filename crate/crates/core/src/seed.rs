use sha2::{Digest, Sha256};

/// Derives an independent 64-bit seed from a master seed and a label
/// (typically a clip id), so per-item randomness does not depend on the
/// order in which items are visited.
pub fn derive_seed(master: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
