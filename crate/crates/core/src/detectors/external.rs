//! Keypoint CSV files produced by external detector programs.
//!
//! The first line is exactly `x,y,scale,response`; every following line is
//! one keypoint with decimal-dot floats.

use std::fs;
use std::path::Path;

use super::Keypoint;
use crate::error::{Error, Result};

pub const KEYPOINT_HEADER: &str = "x,y,scale,response";

/// File an external detector is expected to write for 1-based step `k`.
pub fn keypoint_file_name(scene_id: &str, k: usize) -> String {
    format!("{scene_id}_step{k}.csv")
}

/// Parses a keypoint CSV, preserving row order.
///
/// With `dims = Some((w, h))` every keypoint must satisfy `0 <= x < w` and
/// `0 <= y < h`; without it coordinates only need to be non-negative.
pub fn ingest_keypoints(path: impl AsRef<Path>, dims: Option<(usize, usize)>) -> Result<Vec<Keypoint>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_keypoints(&text, &path.display().to_string(), dims)
}

pub fn parse_keypoints(text: &str, source_name: &str, dims: Option<(usize, usize)>) -> Result<Vec<Keypoint>> {
    let parse_err = |line: u64, message: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        message,
    };
    let first = text.lines().next().unwrap_or("");
    if first != KEYPOINT_HEADER {
        return Err(parse_err(1, format!("expected header {KEYPOINT_HEADER:?}, found {first:?}")));
    }

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", record.len())));
        }
        let mut fields = [0.0f64; 4];
        for (slot, raw) in fields.iter_mut().zip(record.iter()) {
            *slot = raw
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("not a number: {raw:?}")))?;
        }
        let kp = Keypoint {
            x: fields[0],
            y: fields[1],
            scale: fields[2],
            response: fields[3],
        };
        kp.validate(dims)
            .map_err(|msg| Error::Validation(format!("{source_name}:{line}: {msg}")))?;
        out.push(kp);
    }
    Ok(out)
}

/// Serializes keypoints in the format [`ingest_keypoints`] reads.
pub fn format_keypoints(kps: &[Keypoint]) -> String {
    let mut out = String::from(KEYPOINT_HEADER);
    out.push('\n');
    for kp in kps {
        out.push_str(&format!("{},{},{},{}\n", kp.x, kp.y, kp.scale, kp.response));
    }
    out
}

pub fn write_keypoints(kps: &[Keypoint], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_keypoints(kps)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rows_in_order() {
        let text = "x,y,scale,response\n10.5,20.25,3.2,0.9\n0,0,1,0\n";
        let kps = parse_keypoints(text, "t", Some((100, 100))).unwrap();
        assert_eq!(
            kps,
            vec![
                Keypoint { x: 10.5, y: 20.25, scale: 3.2, response: 0.9 },
                Keypoint { x: 0.0, y: 0.0, scale: 1.0, response: 0.0 },
            ]
        );
    }

    #[test]
    fn header_only_is_empty() {
        assert!(parse_keypoints("x,y,scale,response\n", "t", None).unwrap().is_empty());
    }

    #[test]
    fn negative_coordinate_is_a_validation_error() {
        let err = parse_keypoints("x,y,scale,response\n-1,5,1,0\n", "t", Some((100, 100))).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn out_of_bounds_needs_dims() {
        let text = "x,y,scale,response\n150,5,1,0\n";
        assert!(parse_keypoints(text, "t", None).is_ok());
        assert!(parse_keypoints(text, "t", Some((100, 100))).is_err());
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let text = "x,y,scale,response\n1,2,1,0\n1,2,oops,0\n";
        match parse_keypoints(text, "kp.csv", None).unwrap_err() {
            Error::Parse { line, source_name, .. } => {
                assert_eq!(line, 3);
                assert_eq!(source_name, "kp.csv");
            }
            other => panic!("unexpected {other}"),
        }
        match parse_keypoints("x,y,scale,response\n1,2,3\n", "kp.csv", None).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn wrong_header_is_rejected() {
        let err = parse_keypoints("x,y,s,r\n1,1,1,1\n", "t", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn scale_below_one_is_rejected() {
        assert!(parse_keypoints("x,y,scale,response\n1,1,0.5,1\n", "t", None).is_err());
        assert!(parse_keypoints("x,y,scale,response\n1,1,1,NaN\n", "t", None).is_err());
    }

    #[test]
    fn format_round_trips() {
        let kps = vec![Keypoint { x: 1.25, y: 0.1 + 0.2, scale: 2.0, response: -3e-7 }];
        let back = parse_keypoints(&format_keypoints(&kps), "t", None).unwrap();
        assert_eq!(back, kps);
    }
}
