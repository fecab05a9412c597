use super::message::UrMessage;
use super::{check_dim, BobOutput, ProtocolHandle, ProtocolParams};
use crate::error::{param, Result};
use crate::gfq::FieldVec;
use crate::levels::LevelFamily;
use crate::prf::SharedRandomness;
use crate::sparse_recovery::RecoveryScheme;

/// The level-subsampled sparse-recovery protocol over GF(q).
#[derive(Debug, Clone)]
pub struct UrProtocol {
    params: ProtocolParams,
    scheme: RecoveryScheme,
    levels: LevelFamily,
}

impl UrProtocol {
    pub fn new(params: ProtocolParams) -> Result<Self> {
        params.validate()?;
        let prf = SharedRandomness::new(params.seed);
        let scheme = RecoveryScheme::build(
            params.n,
            params.sparsity(),
            params.q,
            params.slack,
            prf.word("protocol-matrix", &[]),
        )?;
        let levels = LevelFamily::for_protocol(prf.word("protocol-levels", &[]), params.n, params.k)?;
        Ok(Self { params, scheme, levels })
    }

    pub fn params(&self) -> &ProtocolParams {
        &self.params
    }

    pub fn scheme(&self) -> &RecoveryScheme {
        &self.scheme
    }

    pub fn levels(&self) -> &LevelFamily {
        &self.levels
    }

    pub fn max_level(&self) -> u32 {
        self.levels.max_level()
    }

    pub fn empty_message(&self) -> UrMessage {
        let p = &self.params;
        UrMessage::zeros(p.n, p.k, p.q, self.max_level(), self.scheme.rows(), p.seed)
    }

    /// `v_j += c · Π e_i` for every level `j` containing `i`.
    pub(crate) fn add_to_levels(&self, sketches: &mut [FieldVec], i: usize, c: u32) {
        let col = self.scheme.matrix().column(i);
        for v in &mut sketches[..=self.levels.depth(i) as usize] {
            v.add_scaled(c, col);
        }
    }

    /// Level sketches `v_j = Π x|_{h_j = 1}` of an arbitrary vector.
    pub fn sketch_vector(&self, x: &FieldVec) -> Result<UrMessage> {
        if x.len() != self.params.n || x.modulus() != self.params.q {
            return param(format!(
                "vector of length {} over GF({}) does not match n={} q={}",
                x.len(),
                x.modulus(),
                self.params.n,
                self.params.q
            ));
        }
        let mut msg = self.empty_message();
        for i in x.support() {
            self.add_to_levels(msg.sketches_mut(), i, x.get(i));
        }
        Ok(msg)
    }

    pub fn alice(&self, x: &[bool]) -> Result<UrMessage> {
        check_dim(x, self.params.n, "Alice's input")?;
        let mut msg = self.empty_message();
        for (i, _) in x.iter().enumerate().filter(|(_, &b)| b) {
            self.add_to_levels(msg.sketches_mut(), i, 1);
        }
        Ok(msg)
    }

    pub fn check_message(&self, msg: &UrMessage) -> Result<()> {
        let p = &self.params;
        if msg.dim() != p.n
            || msg.k() != p.k
            || msg.modulus() != p.q
            || msg.max_level() != self.max_level()
            || msg.rows() != self.scheme.rows()
            || msg.seed() != p.seed
        {
            return param("message was produced under different protocol parameters");
        }
        Ok(())
    }

    /// Descends from level `L`, decoding `v_j − Π y|_{h_j = 1}` at each
    /// level. Returns the level and the decoded difference, or `None` when
    /// level 0 is undecodable.
    pub fn recover(&self, msg: &UrMessage, y: &[bool]) -> Result<Option<(u32, FieldVec)>> {
        self.check_message(msg)?;
        check_dim(y, self.params.n, "Bob's input")?;
        let q = self.params.q;
        let mut diff: Vec<FieldVec> = msg.sketches().to_vec();
        for (i, _) in y.iter().enumerate().filter(|(_, &b)| b) {
            self.add_to_levels(&mut diff, i, q - 1);
        }
        let k = self.params.k;
        for j in (0..=self.max_level()).rev() {
            match self.scheme.exhaustive_decode(&diff[j as usize])? {
                Some(w) if w.weight() >= k || j == 0 => return Ok(Some((j, w))),
                _ => {}
            }
        }
        Ok(None)
    }

    pub fn bob(&self, msg: &UrMessage, y: &[bool]) -> Result<BobOutput> {
        Ok(match self.recover(msg, y)? {
            Some((_, w)) => {
                let mut idx = w.support();
                idx.truncate(self.params.k);
                BobOutput::Indices(idx)
            }
            None => BobOutput::Fail,
        })
    }
}

impl ProtocolHandle for UrProtocol {
    fn dim(&self) -> usize {
        self.params.n
    }

    fn k(&self) -> usize {
        self.params.k
    }

    fn alice(&self, x: &[bool]) -> Result<Vec<u8>> {
        Ok(UrProtocol::alice(self, x)?.serialize())
    }

    fn bob(&self, message: &[u8], y: &[bool]) -> Result<BobOutput> {
        let msg = UrMessage::deserialize(message)?;
        UrProtocol::bob(self, &msg, y)
    }
}
