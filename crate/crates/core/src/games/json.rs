//! Strategy interchange format keyed by symbol labels.

use serde_json::{Map, Value};

use super::{PrefixTable, TeamStrategy};
use crate::channels::GameChannel;
use crate::cone::{checked_pow, sequence_digits, sequence_index};
use crate::error::{Error, Result};

fn bad(msg: impl Into<String>) -> Error {
    Error::Input(format!("bad strategy JSON: {}", msg.into()))
}

impl TeamStrategy {
    /// `{"codebook": {m: [x, ...]}, "policy": {"m|y1,y2": [payoff, ...]}, "decoder": {"y1,...,yn": m}}`.
    pub fn to_json(&self, channel: &GameChannel) -> Value {
        let outs = channel.outputs();
        let d = outs.len();
        let mut codebook = Map::new();
        let mut policy = Map::new();
        for (m, cw) in self.codebook.iter().enumerate() {
            let labels: Vec<&str> = cw.iter().map(|&x| channel.inputs().label(x)).collect();
            codebook.insert(m.to_string(), serde_json::json!(labels));
            let t = &self.policy[m];
            for i in 0..t.depth() {
                for (idx, w) in t.level(i).iter().enumerate() {
                    let key = format!("{m}|{}", outs.sequence_label(&sequence_digits(idx, d, i)));
                    policy.insert(key, serde_json::json!(w));
                }
            }
        }
        let n = self.codebook.first().map_or(0, Vec::len);
        let mut decoder = Map::new();
        for (idx, &m) in self.decoder.iter().enumerate() {
            decoder.insert(outs.sequence_label(&sequence_digits(idx, d, n)), Value::from(m));
        }
        serde_json::json!({"codebook": codebook, "policy": policy, "decoder": decoder})
    }

    pub fn from_json(value: &Value, channel: &GameChannel, n: usize) -> Result<Self> {
        let outs = channel.outputs();
        let d = outs.len();
        let get = |k: &str| value.get(k).and_then(Value::as_object).ok_or_else(|| bad(format!("missing \"{k}\"")));
        let cb = get("codebook")?;
        let messages = cb.len();
        let mut codebook = Vec::with_capacity(messages);
        for m in 0..messages {
            let cw = cb.get(&m.to_string()).and_then(Value::as_array).ok_or_else(|| bad(format!("no codeword for {m}")))?;
            let xs = cw
                .iter()
                .map(|x| x.as_str().ok_or_else(|| bad("codeword symbols are labels")).and_then(|s| channel.inputs().require_index(s)))
                .collect::<Result<Vec<_>>>()?;
            if xs.len() != n {
                return Err(bad(format!("codeword for {m} has length {}", xs.len())));
            }
            codebook.push(xs);
        }
        let pol = get("policy")?;
        let mut policy = Vec::with_capacity(messages);
        for m in 0..messages {
            let mut t = PrefixTable::filled(d, n, Vec::new())?;
            for i in 0..n {
                for idx in 0..t.level(i).len() {
                    let key = format!("{m}|{}", outs.sequence_label(&sequence_digits(idx, d, i)));
                    let w: Vec<f64> = pol
                        .get(&key)
                        .cloned()
                        .ok_or_else(|| bad(format!("no portfolio for \"{key}\"")))
                        .and_then(|v| serde_json::from_value(v).map_err(|e| bad(e.to_string())))?;
                    if w.len() != d {
                        return Err(bad(format!("portfolio \"{key}\" has wrong length")));
                    }
                    *t.at_mut(i, idx) = w;
                }
            }
            policy.push(t);
        }
        let dec = get("decoder")?;
        let leaves = checked_pow(d, n).ok_or_else(|| bad("|Y|^n overflows"))?;
        let mut decoder = vec![usize::MAX; leaves];
        for (k, v) in dec {
            let idx = sequence_index(&outs.parse_sequence(k)?, d);
            if outs.parse_sequence(k)?.len() != n {
                return Err(bad(format!("decoder key \"{k}\" has wrong length")));
            }
            decoder[idx] = v.as_u64().map(|m| m as usize).filter(|&m| m < messages).ok_or_else(|| bad(format!("decoder value for \"{k}\"")))?;
        }
        if decoder.contains(&usize::MAX) {
            return Err(bad("decoder is not total"));
        }
        Ok(TeamStrategy { codebook, policy, decoder })
    }
}
