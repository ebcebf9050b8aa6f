//! Streaming access to corpus files.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use silverner_core::corpus::{CorpusError, CorpusParser};
use silverner_core::TaggedSentence;

#[derive(Debug, thiserror::Error)]
pub enum CorpusReadError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: PathBuf, source: CorpusError },
}

/// Iterator over the sentences of a corpus file; stops after the first
/// error.
pub struct CorpusFile<R> {
    path: PathBuf,
    lines: std::io::Lines<R>,
    parser: CorpusParser,
    done: bool,
}

impl CorpusFile<BufReader<File>> {
    pub fn open(path: &Path) -> Result<Self, CorpusReadError> {
        let file = File::open(path).map_err(|source| CorpusReadError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(Self::from_reader(path, BufReader::new(file)))
    }
}

impl<R: BufRead> CorpusFile<R> {
    pub fn from_reader(path: &Path, reader: R) -> Self {
        CorpusFile {
            path: path.to_path_buf(),
            lines: reader.lines(),
            parser: CorpusParser::new(),
            done: false,
        }
    }
}

impl<R: BufRead> Iterator for CorpusFile<R> {
    type Item = Result<TaggedSentence, CorpusReadError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            match self.lines.next() {
                None => {
                    self.done = true;
                    return self.parser.finish().map(Ok);
                }
                Some(Err(source)) => {
                    self.done = true;
                    return Some(Err(CorpusReadError::Io {
                        path: self.path.clone(),
                        source,
                    }));
                }
                Some(Ok(line)) => match self.parser.push_line(&line) {
                    Ok(Some(sentence)) => return Some(Ok(sentence)),
                    Ok(None) => {}
                    Err(source) => {
                        self.done = true;
                        return Some(Err(CorpusReadError::Format {
                            path: self.path.clone(),
                            source,
                        }));
                    }
                },
            }
        }
    }
}
