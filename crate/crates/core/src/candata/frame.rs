use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::{FeatureVector, N_FEATURES};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest standard (11-bit) CAN identifier.
pub const MAX_CAN_ID: u16 = 0x7FF;

/// Traffic condition a frame was captured under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TrafficClass {
    Normal,
    DoS,
    Fuzzy,
    Impersonation,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 4] = [
        TrafficClass::Normal,
        TrafficClass::DoS,
        TrafficClass::Fuzzy,
        TrafficClass::Impersonation,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TrafficClass::Normal => "Normal",
            TrafficClass::DoS => "DoS",
            TrafficClass::Fuzzy => "Fuzzy",
            TrafficClass::Impersonation => "Impersonation",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TrafficClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TrafficClass::ALL
            .iter()
            .copied()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown traffic class {s:?}")))
    }
}

/// One CAN record. Payload bytes past `dlc` are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanFrame {
    pub timestamp: f64,
    pub can_id: u16,
    pub remote: bool,
    pub dlc: u8,
    pub data: [u8; 8],
    pub label: TrafficClass,
}

impl CanFrame {
    pub fn new(
        timestamp: f64,
        can_id: u16,
        remote: bool,
        payload: &[u8],
        label: TrafficClass,
    ) -> Result<Self> {
        if !(timestamp.is_finite() && timestamp >= 0.0) {
            return Err(Error::invalid(format!("bad timestamp {timestamp}")));
        }
        if can_id > MAX_CAN_ID {
            return Err(Error::invalid(format!("CAN id {can_id:#x} exceeds 0x7FF")));
        }
        if payload.len() > 8 {
            return Err(Error::invalid(format!("payload of {} bytes", payload.len())));
        }
        let mut data = [0u8; 8];
        data[..payload.len()].copy_from_slice(payload);
        Ok(CanFrame {
            timestamp,
            can_id,
            remote,
            dlc: payload.len() as u8,
            data,
            label,
        })
    }

    pub fn payload(&self) -> &[u8] {
        &self.data[..self.dlc as usize]
    }
}

/// Canonical OTIDS rendering: six-decimal timestamp, four-digit hex id.
impl fmt::Display for CanFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Timestamp: {:.6} ID: {:04x} {} DLC: {}",
            self.timestamp,
            self.can_id,
            if self.remote { "100" } else { "000" },
            self.dlc
        )?;
        for b in self.payload() {
            write!(f, " {b:02x}")?;
        }
        Ok(())
    }
}

fn expect_token<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    line_no: usize,
    keyword: &str,
) -> Result<()> {
    match tokens.next() {
        Some(t) if t == keyword => Ok(()),
        Some(t) => Err(Error::parse(line_no, format!("expected {keyword:?}, found {t:?}"))),
        None => Err(Error::parse(line_no, format!("missing {keyword:?}"))),
    }
}

fn next_field<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    line_no: usize,
    what: &str,
) -> Result<&'a str> {
    tokens
        .next()
        .ok_or_else(|| Error::parse(line_no, format!("missing {what}")))
}

/// Parses one OTIDS line, e.g.
/// `Timestamp: 1.234000 ID: 0316 000 DLC: 8 05 21 68 09 21 21 00 6f`.
pub fn parse_otids_record(line: &str, line_no: usize, label: TrafficClass) -> Result<CanFrame> {
    let mut tokens = line.split_whitespace();

    expect_token(&mut tokens, line_no, "Timestamp:")?;
    let ts_text = next_field(&mut tokens, line_no, "timestamp")?;
    let timestamp: f64 = ts_text
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad timestamp {ts_text:?}")))?;
    if !(timestamp.is_finite() && timestamp >= 0.0) {
        return Err(Error::parse(line_no, format!("bad timestamp {ts_text:?}")));
    }

    expect_token(&mut tokens, line_no, "ID:")?;
    let id_text = next_field(&mut tokens, line_no, "identifier")?;
    if id_text.is_empty() || id_text.len() > 8 {
        return Err(Error::parse(line_no, format!("bad identifier {id_text:?}")));
    }
    let can_id = u32::from_str_radix(id_text, 16)
        .map_err(|_| Error::parse(line_no, format!("bad identifier {id_text:?}")))?;
    if can_id > u32::from(MAX_CAN_ID) {
        return Err(Error::parse(line_no, format!("identifier {id_text} exceeds 0x7FF")));
    }

    let remote = match next_field(&mut tokens, line_no, "remote flag")? {
        "000" => false,
        "100" => true,
        other => return Err(Error::parse(line_no, format!("bad remote flag {other:?}"))),
    };

    expect_token(&mut tokens, line_no, "DLC:")?;
    let dlc_text = next_field(&mut tokens, line_no, "DLC")?;
    let dlc: usize = dlc_text
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad DLC {dlc_text:?}")))?;
    if dlc > 8 {
        return Err(Error::parse(line_no, format!("DLC {dlc} exceeds 8")));
    }

    let mut payload = Vec::with_capacity(dlc);
    for tok in tokens {
        if tok.len() != 2 {
            return Err(Error::parse(line_no, format!("bad data byte {tok:?}")));
        }
        let b = u8::from_str_radix(tok, 16)
            .map_err(|_| Error::parse(line_no, format!("bad data byte {tok:?}")))?;
        payload.push(b);
    }
    if payload.len() != dlc {
        return Err(Error::parse(
            line_no,
            format!("DLC {dlc} but {} data bytes", payload.len()),
        ));
    }

    let mut data = [0u8; 8];
    data[..dlc].copy_from_slice(&payload);
    Ok(CanFrame {
        timestamp,
        can_id: can_id as u16,
        remote,
        dlc: dlc as u8,
        data,
        label,
    })
}

/// Parses a whole OTIDS session log; every frame gets `label`.
/// Line numbers in errors are 1-based.
pub fn parse_otids_log<R: BufRead>(reader: R, label: TrafficClass) -> Result<Vec<CanFrame>> {
    let mut frames: Vec<CanFrame> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let frame = parse_otids_record(&line, line_no, label)?;
        if let Some(prev) = frames.last() {
            if frame.timestamp < prev.timestamp {
                return Err(Error::parse(line_no, "timestamp decreases"));
            }
        }
        frames.push(frame);
    }
    Ok(frames)
}

/// `[id/2047, dlc/8, data[0]/255, ..., data[7]/255]`.
pub fn extract_features<S: Scalar>(frame: &CanFrame) -> FeatureVector<S> {
    let mut values = Vec::with_capacity(N_FEATURES);
    values.push(S::from_count(frame.can_id as usize) / S::from_count(MAX_CAN_ID as usize));
    values.push(S::from_count(frame.dlc as usize) / S::lit(8.0));
    for b in frame.data {
        values.push(S::from_count(b as usize) / S::lit(255.0));
    }
    FeatureVector::new(values)
}
