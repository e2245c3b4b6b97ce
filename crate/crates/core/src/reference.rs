//! Published −ln(BER) results at 4, 5 and 6 dB, kept for comparison in
//! reports and tests. Nothing here is produced by this crate.

/// One row of a reference table: code family, `(n, k)` and −ln(BER) at
/// 4, 5 and 6 dB for each listed decoder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub family: &'static str,
    pub n: usize,
    pub k: usize,
    pub values: [[f64; 3]; 4],
}

/// Column order of [`TIMESTEP_TABLE`]: reverse steps T.
pub const TIMESTEP_COLUMNS: [usize; 4] = [1, 5, 10, 20];

/// −ln(BER) of the diffusion decoder for T ∈ {1, 5, 10, 20}.
pub const TIMESTEP_TABLE: [ReferenceRow; 11] = [
    row("LDPC", 121, 60, [[3.98, 5.82, 8.75], [4.71, 7.48, 11.89], [5.1, 8.14, 12.98], [5.24, 8.55, 13.21]]),
    row("LDPC", 121, 70, [[4.72, 6.95, 9.94], [6.01, 9.48, 14.41], [6.33, 10.04, 15.42], [6.59, 10.36, 15.42]]),
    row("LDPC", 121, 80, [[5.24, 7.64, 10.65], [6.8, 10.49, 15.46], [7.27, 11.15, 16.79], [7.48, 11.65, 17.2]]),
    row("LDPC", 49, 24, [[4.54, 6.06, 8.24], [5.48, 7.43, 10.31], [5.86, 7.83, 11.07], [5.8, 7.96, 11.2]]),
    row("Polar", 128, 64, [[2.88, 3.28, 3.74], [3.74, 4.84, 6.12], [4.84, 6.62, 9.09], [6.46, 9.31, 13.11]]),
    row("Polar", 128, 86, [[3.41, 3.92, 4.55], [4.48, 5.75, 7.4], [5.45, 7.1, 9.25], [6.56, 8.87, 11.85]]),
    row("Polar", 128, 96, [[3.66, 4.22, 4.93], [4.5, 5.84, 7.61], [5.46, 7.7, 10.4], [6.35, 8.86, 12.33]]),
    row("Polar", 64, 32, [[2.86, 3.28, 3.76], [4.4, 5.44, 6.68], [5.36, 6.58, 8.54], [6.31, 8.61, 10.96]]),
    row("Polar", 64, 48, [[3.76, 4.48, 5.32], [4.8, 6.25, 8.1], [5.63, 7.56, 9.84], [6.14, 7.95, 10.61]]),
    row("CCSDS", 128, 64, [[4.43, 6.11, 8.37], [6.23, 9.82, 14.39], [6.98, 10.95, 16.54], [7.61, 11.68, 17.01]]),
    row("MACKAY", 96, 48, [[4.67, 6.07, 7.96], [6.39, 9.12, 12.06], [7.26, 10.38, 13.76], [7.59, 11.04, 14.45]]),
];

/// Column order of [`DECODER_TABLE`].
pub const DECODER_COLUMNS: [&str; 4] = ["BP", "HGN", "DDECC", "Ours-20"];

/// −ln(BER) of 5-iteration BP, two published neural decoders and the
/// diffusion decoder at T = 20.
pub const DECODER_TABLE: [ReferenceRow; 11] = [
    row("LDPC", 121, 60, [[4.82, 7.21, 10.87], [5.22, 8.29, 13.0], [4.48, 6.95, 10.65], [5.24, 8.55, 13.21]]),
    row("LDPC", 121, 70, [[5.88, 8.76, 13.04], [6.39, 9.81, 14.04], [5.41, 8.22, 12.22], [6.59, 10.36, 15.42]]),
    row("LDPC", 121, 80, [[6.66, 9.82, 13.98], [6.95, 10.68, 15.8], [6.12, 9.38, 13.25], [7.48, 11.65, 17.2]]),
    row("LDPC", 49, 24, [[5.3, 7.28, 9.88], [5.76, 7.9, 11.17], [5.27, 7.38, 10.23], [5.8, 7.96, 11.2]]),
    row("Polar", 128, 64, [[3.38, 3.8, 4.15], [3.89, 5.18, 6.94], [5.37, 7.75, 10.51], [6.46, 9.31, 13.11]]),
    row("Polar", 128, 86, [[3.8, 4.19, 4.62], [4.57, 6.18, 8.27], [5.61, 7.76, 10.42], [6.56, 8.87, 11.85]]),
    row("Polar", 128, 96, [[3.99, 4.41, 4.78], [4.73, 6.39, 8.57], [5.6, 7.83, 10.56], [6.35, 8.86, 12.33]]),
    row("Polar", 64, 32, [[3.52, 4.04, 4.48], [4.25, 5.49, 7.02], [5.99, 8.16, 10.9], [6.31, 8.61, 10.96]]),
    row("Polar", 64, 48, [[4.15, 4.68, 5.31], [4.91, 6.48, 8.41], [5.55, 7.67, 10.08], [6.14, 7.95, 10.61]]),
    row("CCSDS", 128, 64, [[6.55, 9.65, 13.78], [6.99, 10.57, 15.27], [5.79, 8.48, 12.24], [7.61, 11.68, 17.01]]),
    row("MACKAY", 96, 48, [[6.84, 9.4, 12.57], [7.19, 10.02, 13.16], [6.18, 8.63, 11.53], [7.59, 11.04, 14.45]]),
];

/// BER curves of LDPC (121, 60) at 4, 5 and 6 dB, by decoder.
pub const LDPC_121_60_CURVES: [(&str, [(f64, f64); 3]); 4] = [
    ("BP", [(4.0, 0.008066), (5.0, 0.000739), (6.0, 0.00001902)]),
    ("HGN", [(4.0, 0.005407), (5.0, 0.000251), (6.0, 0.00000226)]),
    ("DDECC", [(4.0, 0.011333), (5.0, 0.000958), (6.0, 0.0000237)]),
    ("Ours-20", [(4.0, 0.005299), (5.0, 0.000193), (6.0, 0.000001832)]),
];

/// Total FLOPs and model bytes on LDPC (121, 60).
pub const COMPLEXITY_LDPC_121_60: [(&str, f64, f64); 4] = [
    ("BP", 316.4e3, 0.0),
    ("HGN", 1.6e9, 1.6e6),
    ("DDECC-Max", 140.3e9, 226.3e3),
    ("Ours-20", 377.6e3, 264.0),
];

const fn row(family: &'static str, n: usize, k: usize, values: [[f64; 3]; 4]) -> ReferenceRow {
    ReferenceRow { family, n, k, values }
}

/// Looks up a row by family (case-insensitive) and `(n, k)`.
pub fn lookup(
    table: &'static [ReferenceRow],
    family: &str,
    n: usize,
    k: usize,
) -> Option<&'static ReferenceRow> {
    table
        .iter()
        .find(|r| r.family.eq_ignore_ascii_case(family) && r.n == n && r.k == k)
}
