//! Locality-sensitive document digests for downstream deduplication.
//!
//! Implements the TLSH construction with 256 buckets and a 3-byte checksum:
//! a 5-byte window slides over the UTF-8 input, six Pearson-permuted triplets
//! per position vote into the buckets, and the digest encodes the bucket
//! quartile pattern plus a length bucket and quartile ratios. Deduplication
//! itself is out of scope; we only emit the digest.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Serialized digest length: "t1", 3 checksum bytes, length byte, ratio
/// byte, and 64 code bytes, all hex.
pub const DIGEST_HEX_LEN: usize = 140;

const MIN_INPUT_BYTES: usize = 50;
const WINDOW: usize = 5;
const CHECKSUM_BYTES: usize = 3;
const CODE_BYTES: usize = 64;
const BUCKETS: usize = 256;

/// Pearson permutation table used by the hash.
const PEARSON: [u8; 256] = [
    1, 87, 49, 12, 176, 178, 102, 166, 121, 193, 6, 84, 249, 230, 44, 163, 14, 197, 213, 181, 161,
    85, 218, 80, 64, 239, 24, 226, 236, 142, 38, 200, 110, 177, 104, 103, 141, 253, 255, 50, 77,
    101, 81, 18, 45, 96, 31, 222, 25, 107, 190, 70, 86, 237, 240, 34, 72, 242, 20, 214, 244, 227,
    149, 235, 97, 234, 57, 22, 60, 250, 82, 175, 208, 5, 127, 199, 111, 62, 135, 248, 174, 169,
    211, 58, 66, 154, 106, 195, 245, 171, 17, 187, 182, 179, 0, 243, 132, 56, 148, 75, 128, 133,
    158, 100, 130, 126, 91, 13, 153, 246, 216, 219, 119, 68, 223, 78, 83, 88, 201, 99, 122, 11, 92,
    32, 136, 114, 52, 10, 138, 30, 48, 183, 156, 35, 61, 26, 143, 74, 251, 94, 129, 162, 63, 152,
    170, 7, 115, 167, 241, 206, 3, 150, 55, 59, 151, 220, 90, 53, 23, 131, 125, 173, 15, 238, 79,
    95, 89, 16, 105, 137, 225, 224, 217, 160, 37, 123, 118, 73, 2, 157, 46, 116, 9, 145, 134, 228,
    207, 212, 202, 215, 69, 229, 27, 188, 67, 124, 168, 252, 42, 4, 29, 108, 21, 247, 19, 205, 39,
    203, 233, 40, 186, 147, 198, 192, 155, 33, 164, 191, 98, 204, 165, 180, 117, 76, 140, 36, 210,
    172, 41, 54, 159, 8, 185, 232, 113, 196, 231, 47, 146, 120, 51, 65, 28, 144, 254, 221, 93, 189,
    194, 139, 112, 43, 71, 109, 184, 209,
];

/// Upper bounds of the geometric length buckets.
const TOPVAL: [usize; 170] = [
    1, 2, 3, 5, 7, 11, 17, 25, 38, 57, 86, 129, 194, 291, 437, 656, 854, 1110, 1443, 1876, 2439,
    3171, 3475, 3823, 4205, 4626, 5088, 5597, 6157, 6772, 7450, 8195, 9014, 9916, 10907, 11998,
    13198, 14518, 15970, 17567, 19323, 21256, 23382, 25720, 28292, 31121, 34233, 37656, 41422,
    45564, 50121, 55133, 60646, 66711, 73382, 80721, 88793, 97672, 107439, 118183, 130002, 143002,
    157302, 173032, 190335, 209369, 230306, 253337, 278670, 306538, 337191, 370911, 408002, 448802,
    493682, 543050, 597356, 657091, 722800, 795081, 874589, 962048, 1058252, 1164078, 1280486,
    1408534, 1549388, 1704327, 1874759, 2062236, 2268459, 2495305, 2744836, 3019320, 3321252,
    3653374, 4018711, 4420582, 4862641, 5348905, 5883796, 6472176, 7119394, 7831333, 8614467,
    9475909, 10423501, 11465851, 12612437, 13873681, 15261050, 16787154, 18465870, 20312458,
    22343706, 24578077, 27035886, 29739474, 32713425, 35984770, 39583245, 43541573, 47895730,
    52685306, 57953837, 63749221, 70124148, 77136564, 84850228, 93335252, 102668779, 112935659,
    124229227, 136652151, 150317384, 165349128, 181884040, 200072456, 220079703, 242087671,
    266296456, 292926096, 322218735, 354440623, 389884688, 428873168, 471760495, 518936559,
    570830240, 627913311, 690704607, 759775136, 835752671, 919327967, 1011260767, 1112386880,
    1223623232, 1345985727, 1480584256, 1628642751, 1791507135, 1970657856, 2167723648, 2384496256,
    2622945920, 2885240448, 3173764736, 3491141248, 3840255616, 4224281216,
];

#[derive(Debug, Error)]
pub enum DigestError {
    #[error("digest must be {DIGEST_HEX_LEN} hex characters, got {got}")]
    Length { got: usize },
    #[error("digest must start with \"t1\"")]
    Prefix,
    #[error("invalid hex at position {position}")]
    Hex { position: usize },
}

/// A computed document digest. Comparing two digests with
/// [`digest_distance`] gives a similarity score; 0 means identical digests.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Digest {
    checksum: [u8; CHECKSUM_BYTES],
    lvalue: u8,
    q1ratio: u8,
    q2ratio: u8,
    code: [u8; CODE_BYTES],
}

fn pearson(salt: u8, a: u8, b: u8, c: u8) -> u8 {
    let mut h = PEARSON[salt as usize];
    h = PEARSON[(h ^ a) as usize];
    h = PEARSON[(h ^ b) as usize];
    PEARSON[(h ^ c) as usize]
}

fn swap_nibbles(b: u8) -> u8 {
    (b << 4) | (b >> 4)
}

/// Geometric length bucket; fails only past the last bucket (~4.2 GB).
fn length_bucket(len: usize) -> Option<u8> {
    let idx = TOPVAL.partition_point(|&t| t < len);
    (idx < TOPVAL.len()).then_some(idx as u8)
}

/// Computes a digest over the UTF-8 bytes of `text`. Returns `None` when the
/// input is shorter than 50 bytes or has too little variation to fill the
/// buckets: the top quartile must be nonzero and more than half of the 256
/// buckets must be hit.
pub fn compute_digest(text: &str) -> Option<Digest> {
    let data = text.as_bytes();
    if data.len() < MIN_INPUT_BYTES {
        return None;
    }

    let mut buckets = [0u32; BUCKETS];
    let mut checksum = [0u8; CHECKSUM_BYTES];
    let mut window = [0u8; WINDOW];
    for (fed, &byte) in data.iter().enumerate() {
        // Window slot ages decrease from j0 (newest) to j4 (oldest).
        let j0 = fed % WINDOW;
        let j1 = (fed + 4) % WINDOW;
        let j2 = (fed + 3) % WINDOW;
        let j3 = (fed + 2) % WINDOW;
        let j4 = (fed + 1) % WINDOW;
        window[j0] = byte;
        if fed < 4 {
            continue;
        }
        checksum[0] = pearson(0, window[j0], window[j1], checksum[0]);
        checksum[1] = pearson(checksum[0], window[j0], window[j1], checksum[1]);
        checksum[2] = pearson(checksum[1], window[j0], window[j1], checksum[2]);
        // Six of the ten triplets in the window; the newest byte is in all.
        for (salt, x, y) in [
            (2, j1, j2),
            (3, j1, j3),
            (5, j2, j3),
            (7, j2, j4),
            (11, j1, j4),
            (13, j3, j4),
        ] {
            let r = pearson(salt, window[j0], window[x], window[y]);
            buckets[r as usize] += 1;
        }
    }

    let nonzero = buckets.iter().filter(|&&b| b > 0).count();
    if nonzero <= BUCKETS / 2 {
        return None;
    }
    let mut sorted = buckets;
    sorted.sort_unstable();
    let (q1, q2, q3) = (sorted[63], sorted[127], sorted[191]);
    if q3 == 0 {
        return None;
    }

    let mut code = [0u8; CODE_BYTES];
    for (i, byte) in code.iter_mut().enumerate() {
        let mut h = 0u8;
        for j in 0..4 {
            let count = buckets[4 * i + j];
            if q3 < count {
                h += 3 << (j * 2);
            } else if q2 < count {
                h += 2 << (j * 2);
            } else if q1 < count {
                h += 1 << (j * 2);
            }
        }
        *byte = h;
    }

    Some(Digest {
        checksum,
        lvalue: length_bucket(data.len())?,
        // 32-bit float division, matching the scheme's reference arithmetic.
        q1ratio: ((q1.wrapping_mul(100) as f32 / q3 as f32) as u32 % 16) as u8,
        q2ratio: ((q2.wrapping_mul(100) as f32 / q3 as f32) as u32 % 16) as u8,
        code,
    })
}

fn mod_diff(x: u32, y: u32, circle: u32) -> u32 {
    let d = x.abs_diff(y);
    d.min(circle - d)
}

/// The scheme's standard distance, length difference included: header
/// differences plus a pairwise 2-bit distance over the code. Symmetric, and
/// 0 exactly when the digests are equal. Layout mismatches cannot occur
/// here: [`Digest::from_hex`] only accepts the 256-bucket 3-byte-checksum
/// layout.
pub fn digest_distance(a: &Digest, b: &Digest) -> u32 {
    let mut result = match mod_diff(a.lvalue as u32, b.lvalue as u32, 256) {
        x @ 0..=1 => x,
        x => x * 12,
    };
    for (qa, qb) in [(a.q1ratio, b.q1ratio), (a.q2ratio, b.q2ratio)] {
        result += match mod_diff(qa as u32, qb as u32, 16) {
            x @ 0..=1 => x,
            x => (x - 1) * 12,
        };
    }
    if a.checksum != b.checksum {
        result += 1;
    }
    for (ca, cb) in a.code.iter().zip(&b.code) {
        for j in 0..4 {
            let pa = (ca >> (j * 2)) & 3;
            let pb = (cb >> (j * 2)) & 3;
            let d = pa.abs_diff(pb) as u32;
            result += if d == 3 { 6 } else { d };
        }
    }
    result
}

impl Digest {
    /// Parses the 140-character hex form, case-insensitively.
    pub fn from_hex(s: &str) -> Result<Self, DigestError> {
        if s.len() != DIGEST_HEX_LEN {
            return Err(DigestError::Length { got: s.len() });
        }
        if !s.is_char_boundary(2) || !s[..2].eq_ignore_ascii_case("t1") {
            return Err(DigestError::Prefix);
        }
        let byte_at = |pos: usize| -> Result<u8, DigestError> {
            u8::from_str_radix(
                s.get(pos..pos + 2).ok_or(DigestError::Hex { position: pos })?,
                16,
            )
            .map_err(|_| DigestError::Hex { position: pos })
        };
        let mut checksum = [0u8; CHECKSUM_BYTES];
        for (i, slot) in checksum.iter_mut().enumerate() {
            *slot = swap_nibbles(byte_at(2 + 2 * i)?);
        }
        let lvalue = swap_nibbles(byte_at(8)?);
        let ratios = byte_at(10)?;
        let mut code = [0u8; CODE_BYTES];
        for i in 0..CODE_BYTES {
            // Code bytes are serialized in reverse order.
            code[CODE_BYTES - 1 - i] = byte_at(12 + 2 * i)?;
        }
        Ok(Digest {
            checksum,
            lvalue,
            q1ratio: ratios >> 4,
            q2ratio: ratios & 0xF,
            code,
        })
    }

    pub fn to_hex(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t1")?;
        for b in self.checksum {
            write!(f, "{:02x}", swap_nibbles(b))?;
        }
        write!(f, "{:02x}", swap_nibbles(self.lvalue))?;
        write!(f, "{:02x}", self.q1ratio << 4 | self.q2ratio)?;
        for b in self.code.iter().rev() {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

impl FromStr for Digest {
    type Err = DigestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Digest::from_hex(s)
    }
}

impl serde::Serialize for Digest {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Digest {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Digest::from_hex(&s).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_digest() -> Digest {
        let text = "The quick brown fox jumps over the lazy dog. Pack my box with five \
                    dozen liquor jugs and then some more filler text to stretch this line.";
        compute_digest(text).unwrap()
    }

    #[test]
    fn below_minimum_is_absent() {
        assert!(compute_digest("").is_none());
        assert!(compute_digest("ten bytes!").is_none());
        assert!(compute_digest(&"x y z ".repeat(9)[..49]).is_none());
    }

    #[test]
    fn no_variation_is_absent() {
        assert!(compute_digest(&"a".repeat(100)).is_none());
        assert!(compute_digest(&"ab".repeat(200)).is_none());
    }

    #[test]
    fn digest_is_deterministic() {
        assert_eq!(sample_digest(), sample_digest());
    }

    #[test]
    fn hex_roundtrip() {
        let d = sample_digest();
        let hex = d.to_string();
        assert_eq!(hex.len(), DIGEST_HEX_LEN);
        assert!(hex.starts_with("t1"));
        assert!(hex.chars().all(|c| c.is_ascii_hexdigit() || c == 't'));
        assert_eq!(hex, hex.to_lowercase());
        let back = Digest::from_hex(&hex).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.to_string(), hex);
        // Parsing is case-insensitive.
        assert_eq!(Digest::from_hex(&hex.to_uppercase()).unwrap(), d);
    }

    #[test]
    fn from_hex_rejects_malformed_input() {
        assert!(matches!(
            Digest::from_hex("t1ab"),
            Err(DigestError::Length { got: 4 })
        ));
        let valid = sample_digest().to_string();
        let mut wrong_prefix = valid.clone();
        wrong_prefix.replace_range(..2, "x9");
        assert!(matches!(
            Digest::from_hex(&wrong_prefix),
            Err(DigestError::Prefix)
        ));
        let mut bad_hex = valid.clone();
        bad_hex.replace_range(20..21, "g");
        assert!(matches!(
            Digest::from_hex(&bad_hex),
            Err(DigestError::Hex { .. })
        ));
    }

    #[test]
    fn distance_of_equal_digests_is_zero() {
        let d = sample_digest();
        assert_eq!(digest_distance(&d, &d), 0);
    }

    #[test]
    fn distance_is_symmetric() {
        let a = sample_digest();
        let b = compute_digest(
            "Entirely different content about rivers, mountains, and the slow \
             migration of glaciers across a continent over thousands of years.",
        )
        .unwrap();
        assert_eq!(digest_distance(&a, &b), digest_distance(&b, &a));
        assert!(digest_distance(&a, &b) > 0);
    }

    #[test]
    fn serde_uses_the_hex_string() {
        let d = sample_digest();
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, format!("\"{d}\""));
        let back: Digest = serde_json::from_str(&json).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn length_buckets_follow_the_table() {
        assert_eq!(length_bucket(1), Some(0));
        assert_eq!(length_bucket(2), Some(1));
        assert_eq!(length_bucket(656), Some(15));
        assert_eq!(length_bucket(657), Some(16));
        assert_eq!(length_bucket(4_224_281_216), Some(169));
        assert_eq!(length_bucket(4_224_281_217), None);
    }
}
