//! Text model format.
//!
//! ```text
//! trendlens-w2v 1 <V> <D> <seed>
//! #meta {json}            (optional)
//! <word> <D reals>        (V lines, input vectors)
//! #output                 (optional, followed by V lines of output vectors)
//! ```
//!
//! Reals use Rust's shortest round-trip formatting, so load(save(m)) is
//! bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::model::{EmbeddingModel, Matrix, ModelMetadata, TrainConfig};
use super::vocab::Vocabulary;
use super::EmbeddingError;

pub const MODEL_MAGIC: &str = "trendlens-w2v";
pub const FORMAT_VERSION: &str = "1";
const META_PREFIX: &str = "#meta ";
const OUTPUT_MARKER: &str = "#output";

pub(crate) fn push_row(out: &mut String, label: &str, values: &[f64]) {
    out.push_str(label);
    for v in values {
        write!(out, " {v}").expect("write to string");
    }
    out.push('\n');
}

/// Parses `label v1 .. vD`. Errors name the label and the 1-based line.
pub(crate) fn parse_row(line: &str, dim: usize, line_no: usize) -> Result<(String, Vec<f64>), EmbeddingError> {
    let mut fields = line.split_whitespace();
    let label = fields
        .next()
        .ok_or_else(|| EmbeddingError::Format {
            line: line_no,
            message: "empty row".into(),
        })?
        .to_string();
    let values: Vec<f64> = fields
        .map(|f| {
            f.parse::<f64>().map_err(|_| EmbeddingError::Format {
                line: line_no,
                message: format!("row {label:?}: invalid number {f:?}"),
            })
        })
        .collect::<Result<_, _>>()?;
    if values.len() != dim {
        return Err(EmbeddingError::RowDimension {
            word: label,
            line: line_no,
            expected: dim,
            found: values.len(),
        });
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(EmbeddingError::Format {
            line: line_no,
            message: format!("row {label:?}: non-finite value {bad}"),
        });
    }
    Ok((label, values))
}

fn header_error(line: &str) -> EmbeddingError {
    EmbeddingError::Header(format!(
        "expected `{MODEL_MAGIC} {FORMAT_VERSION} <V> <D> <seed>`, found {line:?}"
    ))
}

/// Serializes a model. `full` adds the output-vector block.
pub fn model_to_string(model: &EmbeddingModel, full: bool) -> String {
    let v = model.vocab.len();
    let d = model.dim();
    let mut out = String::new();
    writeln!(out, "{MODEL_MAGIC} {FORMAT_VERSION} {v} {d} {}", model.seed()).expect("write to string");
    let meta = ModelMetadata {
        config: Some(model.config.clone()),
        corpus_documents: model.corpus_documents,
        corpus_tokens: model.corpus_tokens,
        counts: model.vocab.counts().to_vec(),
    };
    out.push_str(META_PREFIX);
    out.push_str(&serde_json::to_string(&meta).expect("metadata serializes"));
    out.push('\n');
    for (i, w) in model.vocab.words().iter().enumerate() {
        push_row(&mut out, w, model.input.row(i));
    }
    if full {
        out.push_str(OUTPUT_MARKER);
        out.push('\n');
        for (i, w) in model.vocab.words().iter().enumerate() {
            push_row(&mut out, w, model.output.row(i));
        }
    }
    out
}

pub fn save_model(model: &EmbeddingModel, path: impl AsRef<Path>, full: bool) -> Result<(), EmbeddingError> {
    let path = path.as_ref();
    fs::write(path, model_to_string(model, full)).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load_model(path: impl AsRef<Path>) -> Result<EmbeddingModel, EmbeddingError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| EmbeddingError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<EmbeddingModel, EmbeddingError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    let (_, header) = lines.next().ok_or_else(|| header_error(""))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != MODEL_MAGIC || fields[1] != FORMAT_VERSION {
        return Err(header_error(header));
    }
    let parse_num = |s: &str| s.parse::<u64>().map_err(|_| header_error(header));
    let v = parse_num(fields[2])? as usize;
    let d = parse_num(fields[3])? as usize;
    let seed = parse_num(fields[4])?;
    if v == 0 || d == 0 {
        return Err(header_error(header));
    }

    let mut meta = ModelMetadata::default();
    if let Some((line_no, line)) = lines.peek().copied() {
        if let Some(json) = line.strip_prefix(META_PREFIX) {
            meta = serde_json::from_str(json).map_err(|e| EmbeddingError::Format {
                line: line_no,
                message: format!("invalid metadata: {e}"),
            })?;
            lines.next();
        }
    }

    let mut words = Vec::with_capacity(v);
    let mut input = Vec::with_capacity(v * d);
    for _ in 0..v {
        let (line_no, line) = lines.next().ok_or_else(|| EmbeddingError::Format {
            line: text.lines().count() + 1,
            message: format!("expected {v} rows, found {}", words.len()),
        })?;
        let (word, values) = parse_row(line, d, line_no)?;
        words.push(word);
        input.extend(values);
    }

    let mut output = Matrix::zeros(v, d);
    if let Some((_, line)) = lines.peek().copied() {
        if line.trim() == OUTPUT_MARKER {
            lines.next();
            let mut data = Vec::with_capacity(v * d);
            for w in &words {
                let (line_no, line) = lines.next().ok_or_else(|| EmbeddingError::Format {
                    line: text.lines().count() + 1,
                    message: "truncated output block".into(),
                })?;
                let (word, values) = parse_row(line, d, line_no)?;
                if &word != w {
                    return Err(EmbeddingError::Format {
                        line: line_no,
                        message: format!("output row {word:?} does not match input row {w:?}"),
                    });
                }
                data.extend(values);
            }
            output = Matrix::from_vec(v, d, data);
        }
    }
    if let Some((line_no, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(EmbeddingError::Format {
            line: line_no,
            message: format!("unexpected trailing content {line:?} (header declares V = {v})"),
        });
    }

    let counts = if meta.counts.len() == v { meta.counts } else { vec![0; v] };
    let vocab = Vocabulary::from_parts(words, counts).map_err(EmbeddingError::DuplicateWord)?;
    let mut config = meta.config.unwrap_or_default();
    config.dim = d;
    config.seed = seed;
    Ok(EmbeddingModel {
        vocab,
        input: Matrix::from_vec(v, d, input),
        output,
        config: TrainConfig { ..config },
        corpus_documents: meta.corpus_documents,
        corpus_tokens: meta.corpus_tokens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_loads() {
        let m = parse_model("trendlens-w2v 1 2 3 7\na 1 2 3\nb 0.5 -1 1e-3\n").unwrap();
        assert_eq!(m.vocab.len(), 2);
        assert_eq!(m.dim(), 3);
        assert_eq!(m.seed(), 7);
        assert_eq!(m.vector("b").unwrap(), [0.5, -1.0, 1e-3]);
    }

    #[test]
    fn short_row_names_the_word() {
        let err = parse_model("trendlens-w2v 1 2 3 7\na 1 2 3\nbeta 1 2\n").unwrap_err();
        match err {
            EmbeddingError::RowDimension { word, line, .. } => {
                assert_eq!(word, "beta");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn header_and_duplicate_errors() {
        assert!(matches!(
            parse_model("word2vec 1 1 1 1\na 1\n"),
            Err(EmbeddingError::Header(_))
        ));
        assert!(matches!(
            parse_model("trendlens-w2v 2 1 1 1\na 1\n"),
            Err(EmbeddingError::Header(_))
        ));
        assert!(matches!(
            parse_model("trendlens-w2v 1 2 1 1\na 1\na 2\n"),
            Err(EmbeddingError::DuplicateWord(w)) if w == "a"
        ));
        assert!(parse_model("trendlens-w2v 1 1 1 1\na 1\nb 2\n").is_err());
        assert!(parse_model("trendlens-w2v 1 2 1 1\na 1\n").is_err());
    }

    #[test]
    fn full_block_round_trips_output_vectors() {
        let text = "trendlens-w2v 1 1 2 0\nw 1 2\n#output\nw 3 4\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.output.row(0), [3.0, 4.0]);
        let again = parse_model(&model_to_string(&m, true)).unwrap();
        assert_eq!(again.output, m.output);
        assert_eq!(again.input, m.input);
    }
}
