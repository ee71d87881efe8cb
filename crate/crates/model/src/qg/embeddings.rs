use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::nn::Tensor;
use crate::vocab::Vocabulary;
use crate::{Error, Result};

/// Reads `token v1 ... vd` lines (GloVe text format) into the rows of
/// `table` for tokens present in `vocab`. Returns the number of rows set.
pub fn load_text_embeddings(path: &Path, vocab: &Vocabulary, table: &mut Tensor) -> Result<usize> {
    let reader = BufReader::new(File::open(path)?);
    let mut found = 0;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let mut fields = line.split(' ');
        let Some(token) = fields.next() else { continue };
        let values: Vec<&str> = fields.filter(|f| !f.is_empty()).collect();
        // word2vec-style "count dim" header
        if lineno == 0 && values.len() == 1 {
            continue;
        }
        let Some(row) = vocab.get(token) else { continue };
        if values.len() != table.cols {
            return Err(Error::Dataset(format!(
                "{}:{}: expected {} values, found {}",
                path.display(),
                lineno + 1,
                table.cols,
                values.len()
            )));
        }
        let dst = table.row_mut(row);
        for (d, v) in dst.iter_mut().zip(values) {
            *d = v
                .parse()
                .map_err(|_| Error::Dataset(format!("{}:{}: bad number {v:?}", path.display(), lineno + 1)))?;
        }
        found += 1;
    }
    Ok(found)
}
