//! BEC and BI-AWGN channel models.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

/// Ternary BEC symbol. Also used for hard decisions, where `Erased` marks an
/// undecided bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(u8)]
pub enum Symbol {
    Zero = 0,
    One = 1,
    #[default]
    Erased = 2,
}

impl Symbol {
    pub fn from_bit(bit: u8) -> Self {
        if bit & 1 == 1 {
            Symbol::One
        } else {
            Symbol::Zero
        }
    }

    pub fn is_erased(self) -> bool {
        self == Symbol::Erased
    }

    pub fn bit(self) -> Option<u8> {
        match self {
            Symbol::Zero => Some(0),
            Symbol::One => Some(1),
            Symbol::Erased => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelModel {
    Bec { epsilon: f64 },
    BiAwgn { sigma: f64 },
}

impl ChannelModel {
    pub fn bec(epsilon: f64) -> Option<Self> {
        (0.0..=1.0)
            .contains(&epsilon)
            .then_some(ChannelModel::Bec { epsilon })
    }

    pub fn bi_awgn(sigma: f64) -> Option<Self> {
        (sigma > 0.0 && sigma.is_finite()).then_some(ChannelModel::BiAwgn { sigma })
    }
}

/// Per-variable channel observation.
#[derive(Debug, Clone, PartialEq)]
pub enum ReceivedWord<T = f64> {
    Bec(Vec<Symbol>),
    /// Channel LLRs `ln P(y|0)/P(y|1)`.
    Awgn(Vec<T>),
}

impl<T> ReceivedWord<T> {
    pub fn len(&self) -> usize {
        match self {
            ReceivedWord::Bec(s) => s.len(),
            ReceivedWord::Awgn(l) => l.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Passes `codeword` (0/1 per bit) through the channel. BEC erases each bit
/// independently with probability ε; BI-AWGN maps 0 to +1 and 1 to -1, adds
/// N(0, σ²) noise and emits the LLR `2y/σ²`.
pub fn transmit<T: Scalar, R: Rng + ?Sized>(
    codeword: &[u8],
    channel: &ChannelModel,
    rng: &mut R,
) -> ReceivedWord<T> {
    match *channel {
        ChannelModel::Bec { epsilon } => ReceivedWord::Bec(
            codeword
                .iter()
                .map(|&b| {
                    if rng.random::<f64>() < epsilon {
                        Symbol::Erased
                    } else {
                        Symbol::from_bit(b)
                    }
                })
                .collect(),
        ),
        ChannelModel::BiAwgn { sigma } => {
            let scale = 2.0 / (sigma * sigma);
            ReceivedWord::Awgn(
                codeword
                    .iter()
                    .map(|&b| {
                        let x = if b & 1 == 0 { 1.0 } else { -1.0 };
                        let noise: f64 = StandardNormal.sample(rng);
                        T::of(scale * (x + sigma * noise))
                    })
                    .collect(),
            )
        }
    }
}

/// Noise standard deviation for a given Eb/N0 (dB) and code rate.
pub fn ebn0_to_sigma(ebn0_db: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0))).sqrt()
}
