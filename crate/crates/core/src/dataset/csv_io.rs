//! Flat CSV layout: `participant,activity,frame` followed by `<Joint>_{x,y,z}`
//! for the 28 joints in canonical order (87 columns). One row per frame,
//! LF line endings, coordinates with 9 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{HarError, Result};
use crate::skeleton::{
    validate_sequence, ActivityClass, ActivitySequence, JointId, Point3, SkeletonFrame, JOINT_COUNT,
};

use super::{DatasetManifest, DatasetSource};

const KEY_COLUMNS: usize = 3;
const COLUMN_COUNT: usize = KEY_COLUMNS + 3 * JOINT_COUNT;

pub fn header() -> Vec<String> {
    let mut cols = vec![
        "participant".to_string(),
        "activity".to_string(),
        "frame".to_string(),
    ];
    for j in JointId::ALL {
        for axis in ["x", "y", "z"] {
            cols.push(format!("{}_{axis}", j.name()));
        }
    }
    cols
}

/// Positional decimal text with 9 significant digits.
pub fn format_coordinate(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .unwrap_or(0);
    let decimals = (8 - exp).max(0) as usize;
    format!("{v:.decimals$}")
}

pub fn write_dataset(manifest: &DatasetManifest, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| HarError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_dataset_to(manifest, &mut w).map_err(|e| HarError::io(path, e))?;
    w.flush().map_err(|e| HarError::io(path, e))
}

pub fn write_dataset_to<W: Write>(manifest: &DatasetManifest, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{}", header().join(","))?;
    let mut line = String::new();
    for seq in manifest.sequences() {
        for frame in &seq.frames {
            line.clear();
            line.push_str(&format!(
                "{},{},{}",
                seq.participant_id,
                seq.activity.label(),
                frame.frame_index
            ));
            for p in &frame.positions {
                for v in p {
                    line.push(',');
                    line.push_str(&format_coordinate(*v));
                }
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
    }
    Ok(())
}

fn parse_err(line: u64, message: impl Into<String>) -> HarError {
    HarError::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a dataset file; every sequence must validate or the read fails.
pub fn read_dataset(path: &Path) -> Result<DatasetManifest> {
    let file = File::open(path).map_err(|e| HarError::io(path, e))?;
    read_dataset_from(file)
}

pub(crate) fn read_dataset_from<R: std::io::Read>(reader: R) -> Result<DatasetManifest> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);

    let expected = header();
    let mut sequences: Vec<ActivitySequence> = Vec::new();
    let mut seen_header = false;

    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);

        if !seen_header {
            seen_header = true;
            for (i, name) in record.iter().enumerate() {
                match expected.get(i) {
                    Some(e) if e == name => {}
                    Some(_) | None => {
                        return Err(parse_err(line, format!("unexpected column {name:?}")))
                    }
                }
            }
            if record.len() != COLUMN_COUNT {
                return Err(parse_err(
                    line,
                    format!(
                        "header has {} columns, expected {COLUMN_COUNT}",
                        record.len()
                    ),
                ));
            }
            continue;
        }

        if record.len() != COLUMN_COUNT {
            return Err(parse_err(
                line,
                format!("expected {COLUMN_COUNT} fields, found {}", record.len()),
            ));
        }
        let participant: u32 = record[0]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad participant {:?}", &record[0])))?;
        let label: u8 = record[1]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad activity {:?}", &record[1])))?;
        let activity = ActivityClass::from_label(label)
            .ok_or_else(|| parse_err(line, format!("activity {label} outside 1..=9")))?;
        let frame_index: u64 = record[2]
            .trim()
            .parse()
            .map_err(|_| parse_err(line, format!("bad frame index {:?}", &record[2])))?;

        let mut positions: [Point3; JOINT_COUNT] = [[0.0; 3]; JOINT_COUNT];
        for (k, field) in record.iter().skip(KEY_COLUMNS).enumerate() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_err(line, format!("bad coordinate {field:?}")))?;
            if !v.is_finite() {
                return Err(parse_err(
                    line,
                    format!(
                        "non-finite coordinate in column {}",
                        expected[KEY_COLUMNS + k]
                    ),
                ));
            }
            positions[k / 3][k % 3] = v;
        }
        let frame = SkeletonFrame::new(frame_index, positions);
        if frame.head_neck_distance() <= 0.0 {
            return Err(parse_err(line, "Head and Neck coincide"));
        }

        match sequences.last_mut() {
            Some(s) if s.participant_id == participant && s.activity == activity => {
                let prev = s.frames.last().map(|f| f.frame_index).unwrap_or(0);
                if frame_index <= prev {
                    return Err(parse_err(
                        line,
                        format!("frame index {frame_index} not greater than {prev}"),
                    ));
                }
                s.frames.push(frame);
            }
            _ => {
                if sequences
                    .iter()
                    .any(|s| s.participant_id == participant && s.activity == activity)
                {
                    return Err(parse_err(
                        line,
                        format!(
                            "rows for participant {participant} activity {label} are not contiguous"
                        ),
                    ));
                }
                sequences.push(ActivitySequence {
                    participant_id: participant,
                    activity,
                    frames: vec![frame],
                });
            }
        }
    }

    for s in &sequences {
        let violations = validate_sequence(s);
        if !violations.is_empty() {
            return Err(HarError::InvalidSequence {
                participant: s.participant_id,
                activity: s.activity.label(),
                violations: violations
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join("; "),
            });
        }
    }
    DatasetManifest::new(sequences, DatasetSource::FileIngest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame(index: u64) -> SkeletonFrame {
        let mut positions = [[0.0; 3]; JOINT_COUNT];
        for (i, p) in positions.iter_mut().enumerate() {
            *p = [
                0.125 * i as f64 - 1.0,
                1.75 - 0.0625 * i as f64,
                2.5 + index as f64 * 0.0078125,
            ];
        }
        SkeletonFrame::new(index, positions)
    }

    fn manifest(n_seq: u32) -> DatasetManifest {
        let seqs = (1..=n_seq)
            .map(|p| ActivitySequence {
                participant_id: p,
                activity: ActivityClass::Running,
                frames: (0..51).map(frame).collect(),
            })
            .collect();
        DatasetManifest::new(seqs, DatasetSource::FileIngest).unwrap()
    }

    fn to_string(m: &DatasetManifest) -> String {
        let mut buf = Vec::new();
        write_dataset_to(m, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn header_has_87_columns() {
        let h = header();
        assert_eq!(h.len(), 87);
        assert_eq!(h[3], "Head_x");
        assert_eq!(h[86], "EffectorLToe_z");
    }

    #[test]
    fn coordinate_text_has_nine_significant_digits() {
        assert_eq!(format_coordinate(1.0), "1.00000000");
        assert_eq!(format_coordinate(-0.0123456789012), "-0.0123456789");
        assert_eq!(format_coordinate(123.456789012), "123.456789");
        assert_eq!(format_coordinate(9.999999999), "10.0000000");
        assert_eq!(format_coordinate(0.0), "0.00000000");
    }

    #[test]
    fn empty_manifest_writes_header_only() {
        let text = to_string(&DatasetManifest::empty());
        assert_eq!(text.lines().count(), 1);
        let back = read_dataset_from(text.as_bytes()).unwrap();
        assert!(back.is_empty());
    }

    #[test]
    fn one_sequence_writes_51_rows_and_round_trips() {
        let m = manifest(1);
        let text = to_string(&m);
        assert_eq!(text.lines().count(), 52);
        assert!(!text.contains('\r'));
        let back = read_dataset_from(text.as_bytes()).unwrap();
        assert_eq!(back.sequences(), m.sequences());
        assert_eq!(to_string(&back), text);
    }

    #[test]
    fn short_row_reports_line() {
        let m = manifest(2);
        let text = to_string(&m);
        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        // line 12 of the file is index 11
        let fields: Vec<&str> = lines[11].split(',').take(83).collect();
        lines[11] = fields.join(",");
        let broken = lines.join("\n") + "\n";
        match read_dataset_from(broken.as_bytes()) {
            Err(HarError::Parse { line, message }) => {
                assert_eq!(line, 12);
                assert!(message.contains("found 83"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_header_order_and_degenerate_rows() {
        let text = to_string(&manifest(1));
        let swapped = text.replacen("Head_x", "Hed_x", 1);
        assert!(matches!(
            read_dataset_from(swapped.as_bytes()),
            Err(HarError::Parse { line: 1, .. })
        ));

        let mut lines: Vec<String> = text.lines().map(String::from).collect();
        lines.swap(3, 4);
        let unordered = lines.join("\n") + "\n";
        assert!(matches!(
            read_dataset_from(unordered.as_bytes()),
            Err(HarError::Parse { line: 5, .. })
        ));

        let mut m = manifest(1).into_sequences();
        m[0].frames[5].positions[1] = m[0].frames[5].positions[0];
        let m = DatasetManifest::new(m, DatasetSource::FileIngest).unwrap();
        assert!(matches!(
            read_dataset_from(to_string(&m).as_bytes()),
            Err(HarError::Parse { line: 7, .. })
        ));
    }

    #[test]
    fn too_short_sequence_fails_whole_read() {
        let text = to_string(&manifest(1));
        let truncated: String = text.lines().take(41).map(|l| format!("{l}\n")).collect();
        assert!(matches!(
            read_dataset_from(truncated.as_bytes()),
            Err(HarError::InvalidSequence { .. })
        ));
    }
}
