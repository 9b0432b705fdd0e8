//! Replacement of email addresses and public IPv4 addresses with fixed
//! sentinel values.
//!
//! Phone numbers are left alone: the false-positive rate of phone patterns
//! on web text is too high to be worth it.

use std::ops::Range;
use std::sync::LazyLock;

use regex::Regex;

/// Every matched email becomes one of these.
pub const EMAIL_SENTINELS: [&str; 2] = ["email@example.com", "firstname.lastname@example.com"];

/// Every matched public IPv4 address becomes one of these. The sentinels are
/// themselves public addresses, so scrubbing is idempotent rather than a
/// no-op on already-scrubbed text.
pub const IP_SENTINELS: [&str; 6] = [
    "22.214.171.124",
    "126.96.36.199",
    "188.8.131.52",
    "184.108.40.206",
    "220.127.116.11",
    "18.104.22.168",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize)]
pub struct PiiReport {
    pub emails_replaced: u64,
    pub ips_replaced: u64,
}

static EMAIL_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}").unwrap()
});

static IP_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\d{1,3}\.\d{1,3}\.\d{1,3}\.\d{1,3}").unwrap());

fn splitmix64(seed: u64) -> u64 {
    let mut z = seed;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic sentinel index for the n-th match of a kind.
fn pick(seed: u64, ordinal: u64, len: usize) -> usize {
    let mixed = splitmix64(seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(ordinal + 1));
    (mixed % len as u64) as usize
}

fn prev_char(text: &str, at: usize) -> Option<char> {
    text[..at].chars().next_back()
}

fn next_char(text: &str, at: usize) -> Option<char> {
    text[at..].chars().next()
}

fn is_wordish(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// Word-boundary anchoring for an email candidate: nothing alphanumeric may
/// touch either end. The regex already extends the local part as far left as
/// its own character set allows.
fn email_boundaries_ok(text: &str, range: &Range<usize>) -> bool {
    !prev_char(text, range.start).is_some_and(is_wordish)
        && !next_char(text, range.end).is_some_and(is_wordish)
}

/// An IPv4 candidate must not continue a longer number or dotted sequence in
/// either direction ("v1.2.3.4", "1.2.3.4.5").
fn ip_boundaries_ok(text: &str, range: &Range<usize>) -> bool {
    if prev_char(text, range.start).is_some_and(is_wordish) {
        return false;
    }
    if let Some('.') = prev_char(text, range.start) {
        let before_dot = range.start - 1;
        if prev_char(text, before_dot).is_some_and(|c| c.is_ascii_digit()) {
            return false;
        }
    }
    match next_char(text, range.end) {
        Some(c) if is_wordish(c) => return false,
        Some('.') => {
            if next_char(text, range.end + 1).is_some_and(|c| c.is_ascii_digit()) {
                return false;
            }
        }
        _ => {}
    }
    true
}

/// Public means routable: not in any private, loopback, link-local, zero, or
/// multicast-and-above range.
fn is_public_ipv4(octets: [u8; 4]) -> bool {
    let [o1, o2, _, _] = octets;
    !(o1 == 10
        || (o1 == 172 && (16..=31).contains(&o2))
        || (o1 == 192 && o2 == 168)
        || o1 == 127
        || o1 == 0
        || (o1 == 169 && o2 == 254)
        || o1 >= 224)
}

fn parse_octets(candidate: &str) -> Option<[u8; 4]> {
    let mut octets = [0u8; 4];
    let mut parts = candidate.split('.');
    for slot in &mut octets {
        *slot = parts.next()?.parse().ok()?;
    }
    Some(octets)
}

/// Replaces every email address and public IPv4 address in `text` with a
/// sentinel. Which sentinel is a pure function of the seed and the match
/// ordinal within its kind, so reruns are reproducible.
pub fn scrub(text: &str, seed: u64) -> (String, PiiReport) {
    let mut spans: Vec<(Range<usize>, &'static str)> = Vec::new();
    let mut report = PiiReport::default();

    for m in EMAIL_RE.find_iter(text) {
        let range = m.range();
        if email_boundaries_ok(text, &range) {
            let sentinel = EMAIL_SENTINELS[pick(seed, report.emails_replaced, 2)];
            spans.push((range, sentinel));
            report.emails_replaced += 1;
        }
    }

    for m in IP_RE.find_iter(text) {
        let range = m.range();
        if spans
            .iter()
            .any(|(r, _)| r.start < range.end && range.start < r.end)
        {
            continue;
        }
        if !ip_boundaries_ok(text, &range) {
            continue;
        }
        let Some(octets) = parse_octets(m.as_str()) else {
            continue;
        };
        if !is_public_ipv4(octets) {
            continue;
        }
        let sentinel = IP_SENTINELS[pick(seed, report.ips_replaced, 6)];
        spans.push((range, sentinel));
        report.ips_replaced += 1;
    }

    if spans.is_empty() {
        return (text.to_string(), report);
    }
    spans.sort_by_key(|(r, _)| r.start);

    let mut out = String::with_capacity(text.len());
    let mut cursor = 0;
    for (range, sentinel) in spans {
        out.push_str(&text[cursor..range.start]);
        out.push_str(sentinel);
        cursor = range.end;
    }
    out.push_str(&text[cursor..]);
    (out, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_email_sentinel(s: &str) -> bool {
        EMAIL_SENTINELS.contains(&s)
    }

    #[test]
    fn email_is_replaced_by_a_sentinel() {
        let (out, report) = scrub("mail me at jane.doe@corp.example", 7);
        assert_eq!(report.emails_replaced, 1);
        assert_eq!(report.ips_replaced, 0);
        let tail = out.strip_prefix("mail me at ").unwrap();
        assert!(is_email_sentinel(tail), "{tail:?}");
    }

    #[test]
    fn private_ip_is_untouched() {
        let (out, report) = scrub("server at 192.168.0.1", 7);
        assert_eq!(out, "server at 192.168.0.1");
        assert_eq!(report, PiiReport::default());
    }

    #[test]
    fn public_ips_are_both_replaced() {
        let (out, report) = scrub("ping 8.8.8.8 or 9.9.9.9", 7);
        assert_eq!(report.ips_replaced, 2);
        assert_eq!(report.emails_replaced, 0);
        assert!(!out.contains("8.8.8.8"));
        assert!(!out.contains("9.9.9.9"));
        for word in out.split_whitespace() {
            if word.contains('.') {
                assert!(IP_SENTINELS.contains(&word), "{word:?}");
            }
        }
    }

    #[test]
    fn every_excluded_range_is_skipped() {
        let cases = [
            "10.1.2.3",
            "172.16.0.1",
            "172.31.255.255",
            "192.168.255.1",
            "127.0.0.1",
            "0.1.2.3",
            "169.254.10.10",
            "224.0.0.1",
            "239.1.2.3",
            "255.255.255.255",
        ];
        for ip in cases {
            let text = format!("addr {ip} end");
            let (out, report) = scrub(&text, 1);
            assert_eq!(out, text, "{ip}");
            assert_eq!(report.ips_replaced, 0, "{ip}");
        }
        // Near misses on the 172.16/12 block stay public.
        assert_eq!(scrub("x 172.15.0.1 y", 1).1.ips_replaced, 1);
        assert_eq!(scrub("x 172.32.0.1 y", 1).1.ips_replaced, 1);
    }

    #[test]
    fn malformed_octets_are_not_addresses() {
        for text in ["ver 999.1.2.3 here", "1.2.3.4.5 list", "v1.2.3.4 tag"] {
            let (out, report) = scrub(text, 0);
            assert_eq!(out, text);
            assert_eq!(report.ips_replaced, 0);
        }
    }

    #[test]
    fn sentence_final_ip_still_matches() {
        let (out, report) = scrub("traceroute to 8.8.4.4.", 3);
        assert_eq!(report.ips_replaced, 1);
        assert!(out.ends_with('.'));
    }

    #[test]
    fn email_boundaries_reject_joined_text() {
        let (out, report) = scrub("see user@site.com9 here", 0);
        assert_eq!(out, "see user@site.com9 here");
        assert_eq!(report.emails_replaced, 0);

        let (_, report) = scrub("<user@site.com>", 0);
        assert_eq!(report.emails_replaced, 1);
    }

    #[test]
    fn email_swallows_overlapping_ip() {
        let (out, report) = scrub("from 1.2.3.4@relay.example now", 5);
        assert_eq!(report.emails_replaced, 1);
        assert_eq!(report.ips_replaced, 0);
        assert!(!out.contains("relay.example"));
    }

    #[test]
    fn phone_numbers_are_never_touched() {
        let text = "call +1 (555) 123-4567 or 555.123.4567";
        let (out, report) = scrub(text, 9);
        assert_eq!(out, text);
        assert_eq!(report, PiiReport::default());
    }

    #[test]
    fn plain_text_is_byte_identical() {
        let text = "no addresses here, just words and 42 numbers";
        let (out, report) = scrub(text, 11);
        assert_eq!(out, text);
        assert_eq!(report, PiiReport::default());
    }

    #[test]
    fn scrub_is_idempotent() {
        let text = "a@b.co wrote from 8.8.8.8, cc x.y@z.example and 1.1.1.1 plus 9.9.9.9";
        for seed in [0u64, 1, 2, 42, u64::MAX] {
            let (once, r1) = scrub(text, seed);
            let (twice, r2) = scrub(&once, seed);
            assert_eq!(once, twice, "seed {seed}");
            assert_eq!(r1.emails_replaced, r2.emails_replaced);
            assert_eq!(r1.ips_replaced, r2.ips_replaced);
        }
    }

    #[test]
    fn sentinel_choice_is_seeded_and_covers_the_lists() {
        let many: String = (0..20)
            .map(|i| format!("u{i}@host{i}.example 8.8.{i}.{i} "))
            .collect();
        let (out, _) = scrub(&many, 123);
        let (again, _) = scrub(&many, 123);
        assert_eq!(out, again);
        for sentinel in EMAIL_SENTINELS {
            assert!(out.contains(sentinel), "{sentinel} unused over 20 draws");
        }
        let used = IP_SENTINELS.iter().filter(|s| out.contains(**s)).count();
        assert!(used >= 4, "only {used} ip sentinels used over 20 draws");
    }
}
