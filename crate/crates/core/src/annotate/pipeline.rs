// SPDX-License-Identifier: Apache-2.0

use super::gazetteer::{gazetteer_lookup, Gazetteer};
use super::tokenize::tokenize;
use super::{AnnotateError, AnnotatedDocument, Document, Features, ENTITY, LOOKUP, TOKEN, TOKEN_TYPES};

/// Shared read-only resources handed to every stage.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub gazetteer: Option<Gazetteer>,
}

impl Resources {
    pub fn with_gazetteer(gazetteer: Gazetteer) -> Self {
        Self {
            gazetteer: Some(gazetteer),
        }
    }
}

/// A pipeline stage. Stages only append annotations.
pub trait Annotator: Sync {
    fn name(&self) -> &'static str;
    /// Annotation types an earlier stage must produce.
    fn requires(&self) -> &'static [&'static str];
    fn produces(&self) -> &'static [&'static str];
    fn annotate(&self, doc: &mut AnnotatedDocument, resources: &Resources) -> Result<(), AnnotateError>;
}

struct Tokenizer;

impl Annotator for Tokenizer {
    fn name(&self) -> &'static str {
        "tokenize"
    }

    fn requires(&self) -> &'static [&'static str] {
        &[]
    }

    fn produces(&self) -> &'static [&'static str] {
        &TOKEN_TYPES
    }

    fn annotate(&self, doc: &mut AnnotatedDocument, _: &Resources) -> Result<(), AnnotateError> {
        for t in tokenize(doc.text()) {
            doc.add(t.kind, t.span, t.features)?;
        }
        Ok(())
    }
}

struct GazetteerStage;

impl Annotator for GazetteerStage {
    fn name(&self) -> &'static str {
        "gazetteer"
    }

    fn requires(&self) -> &'static [&'static str] {
        &[TOKEN]
    }

    fn produces(&self) -> &'static [&'static str] {
        &[LOOKUP]
    }

    fn annotate(&self, doc: &mut AnnotatedDocument, resources: &Resources) -> Result<(), AnnotateError> {
        let gazetteer = resources
            .gazetteer
            .as_ref()
            .ok_or_else(|| AnnotateError::MissingResource {
                stage: self.name().to_string(),
                resource: "gazetteer",
            })?;
        for (start, end, features) in gazetteer_lookup(doc, gazetteer) {
            doc.add(LOOKUP, start..end, features)?;
        }
        Ok(())
    }
}

/// Promotes each `Lookup` to an `Entity` whose `kind` is the lookup's major
/// type. Stands in for a rule transducer.
struct EntityStage;

impl Annotator for EntityStage {
    fn name(&self) -> &'static str {
        "entity"
    }

    fn requires(&self) -> &'static [&'static str] {
        &[LOOKUP]
    }

    fn produces(&self) -> &'static [&'static str] {
        &[ENTITY]
    }

    fn annotate(&self, doc: &mut AnnotatedDocument, _: &Resources) -> Result<(), AnnotateError> {
        let found: Vec<(usize, usize, Features)> = doc
            .of_type(LOOKUP)
            .into_iter()
            .map(|l| {
                let mut f = Features::new();
                f.insert("kind".into(), l.features.get("major_type").cloned().unwrap_or_default());
                f.insert("subkind".into(), l.features.get("minor_type").cloned().unwrap_or_default());
                f.insert("lookup".into(), l.id.to_string());
                (l.start, l.end, f)
            })
            .collect();
        for (start, end, f) in found {
            doc.add(ENTITY, start..end, f)?;
        }
        Ok(())
    }
}

static BUILTIN: [&dyn Annotator; 3] = [&Tokenizer, &GazetteerStage, &EntityStage];

fn builtin(name: &str) -> Option<&'static dyn Annotator> {
    BUILTIN.iter().copied().find(|a| a.name() == name)
}

/// Ordered list of stage names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pipeline {
    pub stages: Vec<String>,
}

impl Pipeline {
    pub fn new<I, S>(stages: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            stages: stages.into_iter().map(Into::into).collect(),
        }
    }

    /// `tokenize`, `gazetteer`, `entity`.
    pub fn standard() -> Self {
        Self::new(["tokenize", "gazetteer", "entity"])
    }

    /// Resolves stage names and checks that every stage's inputs come from
    /// an earlier stage.
    pub fn resolve(&self) -> Result<Vec<&'static dyn Annotator>, AnnotateError> {
        let mut produced: Vec<&str> = Vec::new();
        let mut out = Vec::with_capacity(self.stages.len());
        for name in &self.stages {
            let stage = builtin(name).ok_or_else(|| AnnotateError::UnknownStage(name.clone()))?;
            if let Some(missing) = stage.requires().iter().find(|r| !produced.contains(r)) {
                return Err(AnnotateError::StageDependencyViolation {
                    stage: name.clone(),
                    missing: missing.to_string(),
                });
            }
            produced.extend(stage.produces());
            out.push(stage);
        }
        Ok(out)
    }
}

/// Runs `pipeline` over `doc`. Ids are dense in stage order.
pub fn run_pipeline(
    doc: &Document,
    pipeline: &Pipeline,
    resources: &Resources,
) -> Result<AnnotatedDocument, AnnotateError> {
    let stages = pipeline.resolve()?;
    let mut out = AnnotatedDocument::from_document(doc);
    for stage in stages {
        stage.annotate(&mut out, resources)?;
    }
    Ok(out)
}
