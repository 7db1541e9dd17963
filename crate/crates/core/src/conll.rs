//! CoNLL-X treebank reading and writing.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use thiserror::Error;

use crate::graph::{DepGraph, GraphError};

#[derive(Debug, Error)]
pub enum ConllError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl ConllError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        ConllError::Parse {
            line,
            message: message.into(),
        }
    }
}

/// One token line. All string columns are kept verbatim, `_` included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub cpos: String,
    pub pos: String,
    pub feats: String,
    pub head: usize,
    pub deprel: String,
    pub phead: String,
    pub pdeprel: String,
}

impl Token {
    /// A token with only form and POS filled in; the rest is `_` and the
    /// head is the root.
    pub fn new(id: usize, form: impl Into<String>, pos: impl Into<String>) -> Self {
        let pos = pos.into();
        Token {
            id,
            form: form.into(),
            lemma: "_".into(),
            cpos: pos.clone(),
            pos,
            feats: "_".into(),
            head: 0,
            deprel: "_".into(),
            phead: "_".into(),
            pdeprel: "_".into(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence { tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn deprels(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.deprel.as_str())
    }

    /// The unlabeled head graph.
    pub fn graph(&self) -> Result<DepGraph, GraphError> {
        DepGraph::from_heads(self.heads())
    }

    /// Copy of this sentence with heads and relations replaced.
    pub fn with_parse(&self, heads: &[usize], deprels: &[String]) -> Sentence {
        let mut out = self.clone();
        for ((tok, &h), rel) in out.tokens.iter_mut().zip(heads).zip(deprels) {
            tok.head = h;
            tok.deprel = rel.clone();
        }
        out
    }
}

fn parse_token(line: &str, line_no: usize) -> Result<Token, ConllError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ConllError::at(
            line_no,
            format!("expected 10 tab-separated columns, found {}", cols.len()),
        ));
    }
    let id = cols[0].parse::<usize>().map_err(|_| {
        if cols[0].contains('-') || cols[0].contains('.') {
            ConllError::at(line_no, format!("multi-word or empty token id '{}' is not CoNLL-X", cols[0]))
        } else {
            ConllError::at(line_no, format!("invalid token id '{}'", cols[0]))
        }
    })?;
    let head = cols[6]
        .parse::<usize>()
        .map_err(|_| ConllError::at(line_no, format!("non-integer head '{}'", cols[6])))?;
    Ok(Token {
        id,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        cpos: cols[3].to_string(),
        pos: cols[4].to_string(),
        feats: cols[5].to_string(),
        head,
        deprel: cols[7].to_string(),
        phead: cols[8].to_string(),
        pdeprel: cols[9].to_string(),
    })
}

/// Checks ids, head ranges and acyclicity. `lines[i]` is the source line of
/// token `i + 1`.
fn validate(tokens: &[Token], lines: &[usize]) -> Result<(), ConllError> {
    let n = tokens.len();
    for (i, tok) in tokens.iter().enumerate() {
        if tok.id != i + 1 {
            return Err(ConllError::at(
                lines[i],
                format!("expected token id {}, found {}", i + 1, tok.id),
            ));
        }
        if tok.head > n {
            return Err(ConllError::at(
                lines[i],
                format!("head {} out of range for {} tokens", tok.head, n),
            ));
        }
        if tok.head == tok.id {
            return Err(ConllError::at(lines[i], "token is its own head"));
        }
    }
    let heads: Vec<usize> = tokens.iter().map(|t| t.head).collect();
    match DepGraph::from_heads(heads) {
        Ok(_) => Ok(()),
        Err(GraphError::Cyclic(node)) => Err(ConllError::at(
            lines[node.max(1) - 1],
            "gold heads contain a directed cycle",
        )),
        Err(e) => Err(ConllError::at(lines[0], e.to_string())),
    }
}

pub fn read_conll<R: BufRead>(reader: R) -> Result<Vec<Sentence>, ConllError> {
    let mut sentences = Vec::new();
    let mut tokens = Vec::new();
    let mut lines = Vec::new();
    let mut flush = |tokens: &mut Vec<Token>, lines: &mut Vec<usize>| -> Result<(), ConllError> {
        if !tokens.is_empty() {
            validate(tokens, lines)?;
            sentences.push(Sentence::new(std::mem::take(tokens)));
            lines.clear();
        }
        Ok(())
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut tokens, &mut lines)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        tokens.push(parse_token(line, line_no)?);
        lines.push(line_no);
    }
    flush(&mut tokens, &mut lines)?;
    Ok(sentences)
}

pub fn read_conll_file<P: AsRef<Path>>(path: P) -> Result<Vec<Sentence>, ConllError> {
    read_conll(BufReader::new(File::open(path)?))
}

pub fn write_conll<W: Write>(mut writer: W, sentences: &[Sentence]) -> io::Result<()> {
    for sentence in sentences {
        for t in &sentence.tokens {
            writeln!(
                writer,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                t.id, t.form, t.lemma, t.cpos, t.pos, t.feats, t.head, t.deprel, t.phead, t.pdeprel
            )?;
        }
        writeln!(writer)?;
    }
    writer.flush()
}

pub fn write_conll_file<P: AsRef<Path>>(path: P, sentences: &[Sentence]) -> io::Result<()> {
    write_conll(BufWriter::new(File::create(path)?), sentences)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO: &str = "1\tdog\t_\tN\tN\t_\t2\tsubj\t_\t_\n2\tbarks\t_\tV\tV\t_\t0\troot\t_\t_\n\n";

    #[test]
    fn reads_a_sentence() {
        let s = read_conll(TWO.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].heads(), vec![2, 0]);
        assert_eq!(s[0].tokens[0].form, "dog");
        assert_eq!(s[0].tokens[1].deprel, "root");
        assert_eq!(s[0].tokens[0].lemma, "_");
    }

    #[test]
    fn empty_input() {
        assert!(read_conll("".as_bytes()).unwrap().is_empty());
        assert!(read_conll("\n\n".as_bytes()).unwrap().is_empty());
    }

    #[test]
    fn comments_and_missing_final_blank() {
        let text = "# sent_id = 1\n1\ta\t_\tX\tX\t_\t0\troot\t_\t_";
        let s = read_conll(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 1);
    }

    fn error_line(text: &str) -> usize {
        match read_conll(text.as_bytes()) {
            Err(ConllError::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn nine_columns_rejected() {
        let text = "1\ta\t_\tX\tX\t_\t0\troot\t_\t_\n2\tb\t_\tX\tX\t_\t1\tdep\t_\n";
        assert_eq!(error_line(text), 2);
    }

    #[test]
    fn bad_heads_rejected() {
        assert_eq!(error_line("1\ta\t_\tX\tX\t_\tx\troot\t_\t_\n"), 1);
        assert_eq!(error_line("1\ta\t_\tX\tX\t_\t0\troot\t_\t_\n2\tb\t_\tX\tX\t_\t7\tdep\t_\t_\n"), 2);
        assert_eq!(error_line("1\ta\t_\tX\tX\t_\t1\troot\t_\t_\n"), 1);
    }

    #[test]
    fn cycle_rejected() {
        let text = "1\ta\t_\tX\tX\t_\t0\troot\t_\t_\n2\tb\t_\tX\tX\t_\t3\tdep\t_\t_\n3\tc\t_\tX\tX\t_\t2\tdep\t_\t_\n";
        let line = error_line(text);
        assert!(line == 2 || line == 3);
    }

    #[test]
    fn multiword_range_rejected() {
        let text = "1-2\tdel\t_\t_\t_\t_\t_\t_\t_\t_\n1\tde\t_\tP\tP\t_\t0\troot\t_\t_\n";
        assert_eq!(error_line(text), 1);
    }

    #[test]
    fn round_trip_with_multiple_roots() {
        let text = "1\ta\tla\tX\tXX\tf=1\t0\troot\t0\troot\n2\tb\t_\tY\tY\t_\t0\troot\t_\t_\n\n1\tc\t_\tZ\tZ\t_\t0\troot\t_\t_\n\n";
        let first = read_conll(text.as_bytes()).unwrap();
        let mut buf = Vec::new();
        write_conll(&mut buf, &first).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), text);
        let second = read_conll(buf.as_slice()).unwrap();
        assert_eq!(first, second);
        assert_eq!(second[0].heads(), vec![0, 0]);
    }

    #[test]
    fn unwritable_path() {
        let s = read_conll(TWO.as_bytes()).unwrap();
        assert!(write_conll_file("/nonexistent-dir/out.conll", &s).is_err());
    }
}
