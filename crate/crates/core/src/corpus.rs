//! On-disk corpus layout and file helpers shared by every stage.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datagen::GenParams;
use crate::documents::{read_document, render, Document, RenderError, TemplateId};
use crate::domain::{DocKind, DocumentPair, GroundTruthLabels};
use crate::par::{self, Parallelism};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("missing {0}")]
    Missing(PathBuf),
    #[error(transparent)]
    Render(#[from] RenderError),
}

impl CorpusError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        if source.kind() == std::io::ErrorKind::NotFound {
            CorpusError::Missing(path.to_path_buf())
        } else {
            CorpusError::Io { path: path.to_path_buf(), source }
        }
    }
}

/// Writes through a temporary sibling and a rename. Files whose content is
/// already `bytes` are left untouched.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    if fs::read(path).is_ok_and(|existing| existing == bytes) {
        return Ok(());
    }
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent)?;
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = parent.join(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CorpusError> {
    write_atomic(path, text.as_bytes()).map_err(|e| CorpusError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), CorpusError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CorpusError::Json { path: path.into(), message: e.to_string() })?;
    s.push('\n');
    write_text(path, &s)
}

pub fn read_text(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CorpusError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CorpusError::Json { path: path.into(), message: e.to_string() })
}

/// Directory name for an agent: `llm:gpt4` becomes `llm-gpt4`.
pub fn agent_slug(agent: &str) -> String {
    agent
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '-' { c } else { '-' })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusLayout {
    pub root: PathBuf,
}

impl CorpusLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        CorpusLayout { root: root.into() }
    }

    fn doc_name(id: &str, kind: DocKind, ext: &str) -> String {
        format!("{id}.{kind}.{ext}")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.join("manifest.json")
    }

    pub fn label(&self, id: &str) -> PathBuf {
        self.root.join("labels").join(format!("{id}.json"))
    }

    pub fn raw(&self, id: &str, kind: DocKind) -> PathBuf {
        self.root.join("raw").join(Self::doc_name(id, kind, "json"))
    }

    pub fn doc(&self, id: &str, kind: DocKind) -> PathBuf {
        self.root.join("docs").join(Self::doc_name(id, kind, "html"))
    }

    pub fn text(&self, id: &str, kind: DocKind) -> PathBuf {
        self.root.join("text").join(Self::doc_name(id, kind, "txt"))
    }

    pub fn extraction(&self, agent: &str, id: &str, kind: DocKind) -> PathBuf {
        self.root.join("extractions").join(agent_slug(agent)).join(Self::doc_name(id, kind, "json"))
    }

    pub fn usage(&self, agent: &str) -> PathBuf {
        self.root.join("usage").join(format!("{}.json", agent_slug(agent)))
    }

    pub fn eval(&self, agent: &str, id: &str, kind: DocKind) -> PathBuf {
        self.root.join("eval").join(agent_slug(agent)).join(Self::doc_name(id, kind, "json"))
    }

    pub fn verify_dir(&self) -> PathBuf {
        self.root.join("verify")
    }

    pub fn reports_dir(&self) -> PathBuf {
        self.root.join("reports")
    }

    pub fn report(&self, stem: &str, ext: &str) -> PathBuf {
        self.reports_dir().join(format!("{stem}.{ext}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub bank_template: TemplateId,
    pub loan_template: TemplateId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub params: GenParams,
    pub pairs: Vec<ManifestEntry>,
}

impl Manifest {
    /// Every document in corpus order, bank before loan within a pair.
    pub fn documents(&self) -> Vec<(String, DocKind)> {
        self.pairs.iter().flat_map(|p| [(p.id.clone(), DocKind::Bank), (p.id.clone(), DocKind::Loan)]).collect()
    }

    /// Pair counts per bank template, in template order.
    pub fn template_distribution(&self) -> Vec<(TemplateId, usize)> {
        TemplateId::BANK
            .iter()
            .map(|t| (*t, self.pairs.iter().filter(|p| p.bank_template == *t).count()))
            .collect()
    }
}

/// A pair with both documents rendered and read back.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedPair {
    pub pair: DocumentPair,
    pub bank: Document,
    pub loan: Document,
    pub bank_text: String,
    pub loan_text: String,
}

pub fn render_pairs(pairs: &[DocumentPair], mode: Parallelism) -> Result<Vec<RenderedPair>, RenderError> {
    par::map_indices(pairs.len(), mode, |i| {
        let pair = &pairs[i];
        let bank = render(pair, DocKind::Bank, TemplateId::for_pair(i).template())?;
        let loan = render(pair, DocKind::Loan, TemplateId::Loan1.template())?;
        Ok(RenderedPair { bank_text: read_document(&bank), loan_text: read_document(&loan), pair: pair.clone(), bank, loan })
    })
    .into_iter()
    .collect()
}

/// Writes labels, raw JSON, markup, text and the manifest.
pub fn write_corpus(layout: &CorpusLayout, params: &GenParams, rendered: &[RenderedPair]) -> Result<Manifest, CorpusError> {
    let mut entries = Vec::with_capacity(rendered.len());
    for r in rendered {
        let id = &r.pair.id;
        write_json(&layout.label(id), &r.pair.labels)?;
        write_json(&layout.raw(id, DocKind::Bank), &r.pair.bank)?;
        write_json(&layout.raw(id, DocKind::Loan), &r.pair.loan)?;
        write_text(&layout.doc(id, DocKind::Bank), &r.bank.content)?;
        write_text(&layout.doc(id, DocKind::Loan), &r.loan.content)?;
        write_text(&layout.text(id, DocKind::Bank), &r.bank_text)?;
        write_text(&layout.text(id, DocKind::Loan), &r.loan_text)?;
        entries.push(ManifestEntry { id: id.clone(), bank_template: r.bank.template_id, loan_template: r.loan.template_id });
    }
    let manifest = Manifest { params: params.clone(), pairs: entries };
    write_json(&layout.manifest(), &manifest)?;
    Ok(manifest)
}

pub fn load_manifest(layout: &CorpusLayout) -> Result<Manifest, CorpusError> {
    read_json(&layout.manifest())
}

pub fn load_labels(layout: &CorpusLayout, id: &str) -> Result<GroundTruthLabels, CorpusError> {
    read_json(&layout.label(id))
}

pub fn load_text(layout: &CorpusLayout, id: &str, kind: DocKind) -> Result<String, CorpusError> {
    read_text(&layout.text(id, kind))
}
