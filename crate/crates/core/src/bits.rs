//! Bitstring helpers shared by the Hamiltonian, simulator and oracle code.
//!
//! Convention used everywhere: qubit `q` is bit `q` of a basis-state index
//! (qubit 0 is the least-significant bit), and textual bitstrings are written
//! with qubit 0 rightmost, e.g. index 1 on three qubits is `"001"`.

/// Bit `q` of a basis-state index.
#[inline]
pub fn index_bit(index: u64, qubit: usize) -> bool {
    (index >> qubit) & 1 == 1
}

/// Expand a basis-state index into per-qubit bits (`bits[q]` = qubit q).
pub fn index_to_bits(index: u64, n_qubits: usize) -> Vec<bool> {
    (0..n_qubits).map(|q| index_bit(index, q)).collect()
}

/// Pack per-qubit bits back into a basis-state index.
pub fn bits_to_index(bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (q, &b)| acc | ((b as u64) << q))
}

/// Render a basis-state index as text, qubit 0 rightmost.
pub fn index_to_text(index: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .rev()
        .map(|q| if index_bit(index, q) { '1' } else { '0' })
        .collect()
}

/// Parse textual bitstrings (qubit 0 rightmost) into per-qubit bits.
pub fn text_to_bits(text: &str) -> Option<Vec<bool>> {
    let mut bits = Vec::with_capacity(text.len());
    for ch in text.chars().rev() {
        match ch {
            '0' => bits.push(false),
            '1' => bits.push(true),
            _ => return None,
        }
    }
    Some(bits)
}
