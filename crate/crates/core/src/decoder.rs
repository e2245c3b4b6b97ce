use crate::channel::{hard_decide, LlrWord};
use crate::codebook::ParityCheckMatrix;

/// Output of any decoder in this crate.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Hard-decided codeword bits.
    pub bits: Vec<u8>,
    /// Final soft beliefs (LLRs).
    pub beliefs: Vec<f64>,
    /// BP iterations or reverse diffusion steps actually executed.
    pub steps_used: usize,
    pub syndrome_zero: bool,
    /// Unsatisfied checks of `bits`.
    pub parity_errors: usize,
}

impl DecodeResult {
    pub(crate) fn from_beliefs(h: &ParityCheckMatrix, beliefs: Vec<f64>, steps_used: usize) -> Self {
        let bits = hard_decide(&beliefs);
        let parity_errors = h.parity_errors(&bits);
        Self {
            bits,
            beliefs,
            steps_used,
            syndrome_zero: parity_errors == 0,
            parity_errors,
        }
    }
}

/// A frame decoder usable by the Monte-Carlo harness.
pub trait Decoder: Sync {
    /// Short identifier used in result tables.
    fn id(&self) -> String;

    fn decode(&self, llr: &LlrWord) -> crate::Result<DecodeResult>;
}

/// Sign decision on the channel LLRs with no decoding at all.
#[derive(Debug, Clone)]
pub struct HardDecisionDecoder {
    h: ParityCheckMatrix,
}

impl HardDecisionDecoder {
    pub fn new(h: ParityCheckMatrix) -> Self {
        Self { h }
    }
}

impl Decoder for HardDecisionDecoder {
    fn id(&self) -> String {
        "hard".into()
    }

    fn decode(&self, llr: &LlrWord) -> crate::Result<DecodeResult> {
        crate::codebook::check_len("LLR word", self.h.n(), llr.len())?;
        Ok(DecodeResult::from_beliefs(&self.h, llr.values.clone(), 0))
    }
}
