//! Labeled image collections and the on-disk layouts they are read from.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::image::{load_image, GrayImage};
use crate::error::{Error, Result};

/// Images with per-image true categories.
///
/// Labels are contiguous indices into `classes`, which keeps the original
/// category identifiers (object numbers, directory names, manifest labels).
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    images: Vec<GrayImage>,
    labels: Vec<usize>,
    names: Vec<String>,
    classes: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        images: Vec<GrayImage>,
        labels: Vec<usize>,
        names: Vec<String>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if images.len() != labels.len() || images.len() != names.len() {
            return Err(Error::Dataset(format!(
                "{} images, {} labels, {} names",
                images.len(),
                labels.len(),
                names.len()
            )));
        }
        if images.len() < 2 {
            return Err(Error::Dataset("a dataset needs at least two images".into()));
        }
        let first = &images[0];
        if let Some((i, img)) = images.iter().enumerate().find(|(_, im)| !im.same_size(first)) {
            return Err(Error::Dataset(format!(
                "mixed image sizes: {} is {}x{}, {} is {}x{}",
                names[0],
                first.width(),
                first.height(),
                names[i],
                img.width(),
                img.height()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::Dataset(format!(
                "label {l} has no class entry ({} classes)",
                classes.len()
            )));
        }
        Ok(Self {
            images,
            labels,
            names,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[GrayImage] {
        &self.images
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    /// Width and height shared by every image.
    pub fn image_size(&self) -> (usize, usize) {
        (self.images[0].width(), self.images[0].height())
    }

    /// Keeps the images whose (contiguous) label is in `keep`, preserving
    /// order and re-indexing the surviving labels from 0.
    pub fn subset_by_labels(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::invalid("subset label list is empty"));
        }
        if let Some(&bad) = keep.iter().find(|&&l| l >= self.classes.len()) {
            return Err(Error::UnknownLabel(format!(
                "{bad} (dataset has {} classes)",
                self.classes.len()
            )));
        }
        let kept: BTreeSet<usize> = keep.iter().copied().collect();
        let remap: Vec<Option<usize>> = (0..self.classes.len())
            .map(|l| kept.contains(&l).then(|| kept.range(..l).count()))
            .collect();
        let classes = kept.iter().map(|&l| self.classes[l].clone()).collect();
        let mut images = Vec::new();
        let mut labels = Vec::new();
        let mut names = Vec::new();
        for i in 0..self.len() {
            if let Some(new) = remap[self.labels[i]] {
                images.push(self.images[i].clone());
                labels.push(new);
                names.push(self.names[i].clone());
            }
        }
        Self::new(images, labels, names, classes)
    }

    /// Subset by category number, matched against the trailing integer of
    /// each class identifier (`7` selects COIL `obj7` or Olivetti `s7`).
    pub fn subset_by_class_numbers(&self, numbers: &[u64]) -> Result<Self> {
        let keep = numbers
            .iter()
            .map(|&n| {
                self.classes
                    .iter()
                    .position(|c| trailing_number(c) == Some(n))
                    .ok_or_else(|| Error::UnknownLabel(format!("category {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.subset_by_labels(&keep)
    }

    /// Indices (into this dataset) of the images a subset would keep.
    pub fn indices_for_class_numbers(&self, numbers: &[u64]) -> Result<Vec<usize>> {
        let mut keep = BTreeSet::new();
        for &n in numbers {
            let l = self
                .classes
                .iter()
                .position(|c| trailing_number(c) == Some(n))
                .ok_or_else(|| Error::UnknownLabel(format!("category {n}")))?;
            keep.insert(l);
        }
        Ok((0..self.len()).filter(|&i| keep.contains(&self.labels[i])).collect())
    }
}

/// Trailing decimal digits of an identifier, if any.
pub fn trailing_number(s: &str) -> Option<u64> {
    let digits: String = s
        .chars()
        .rev()
        .take_while(|c| c.is_ascii_digit())
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    digits.parse().ok()
}

/// Natural ordering: runs of digits compare numerically.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let mut ai = a.chars().peekable();
    let mut bi = b.chars().peekable();
    loop {
        match (ai.peek().copied(), bi.peek().copied()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(x), Some(y)) if x.is_ascii_digit() && y.is_ascii_digit() => {
                let na = take_digits(&mut ai);
                let nb = take_digits(&mut bi);
                let ord = na
                    .trim_start_matches('0')
                    .len()
                    .cmp(&nb.trim_start_matches('0').len())
                    .then_with(|| na.trim_start_matches('0').cmp(nb.trim_start_matches('0')));
                if ord != Ordering::Equal {
                    return ord;
                }
            }
            (Some(x), Some(y)) => {
                if x != y {
                    return x.cmp(&y);
                }
                ai.next();
                bi.next();
            }
        }
    }
}

fn take_digits(it: &mut std::iter::Peekable<std::str::Chars<'_>>) -> String {
    let mut s = String::new();
    while let Some(c) = it.peek().copied().filter(char::is_ascii_digit) {
        s.push(c);
        it.next();
    }
    s
}

/// Parses `obj<int>__<int>.<ext>` (case-insensitive); returns (object, angle).
pub fn parse_coil_name(file_name: &str) -> Option<(u64, u64)> {
    let lower = file_name.to_ascii_lowercase();
    let rest = lower.strip_prefix("obj")?;
    let (obj, rest) = rest.split_once("__")?;
    let (angle, ext) = rest.split_once('.')?;
    if ext.is_empty() || ext.contains('.') {
        return None;
    }
    let all_digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(obj) || !all_digits(angle) {
        return None;
    }
    Some((obj.parse().ok()?, angle.parse().ok()?))
}

const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "ppm", "pnm", "bmp"];

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
}

struct Entry {
    class: String,
    name: String,
    path: PathBuf,
}

/// Loads a labeled dataset from `root`.
///
/// Layouts, in priority order:
/// 1. a manifest of `relative_path,label` rows (`#` starts a comment);
/// 2. COIL-style files `obj<label>__<angle>.<ext>` directly under `root`;
/// 3. one subdirectory per category (the Olivetti/AT&T `s1/1.pgm` layout).
///
/// Images are ordered by (label, name) in natural order and labels are
/// re-indexed from 0.
pub fn load_dataset(root: &Path, manifest: Option<&Path>) -> Result<LabeledDataset> {
    let mut entries = match manifest {
        Some(m) => manifest_entries(root, m)?,
        None => scan_entries(root)?,
    };
    if entries.is_empty() {
        return Err(Error::Dataset(format!("no images found under {}", root.display())));
    }
    entries.sort_by(|a, b| natural_cmp(&a.class, &b.class).then_with(|| natural_cmp(&a.name, &b.name)));

    let mut classes: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(entries.len());
    for e in &entries {
        if classes.last() != Some(&e.class) {
            classes.push(e.class.clone());
        }
        labels.push(classes.len() - 1);
    }
    let images = entries
        .par_iter()
        .map(|e| load_image(&e.path))
        .collect::<Result<Vec<_>>>()?;
    let names = entries.into_iter().map(|e| e.name).collect();
    LabeledDataset::new(images, labels, names, classes)
}

fn manifest_entries(root: &Path, manifest: &Path) -> Result<Vec<Entry>> {
    let text = fs::read_to_string(manifest).map_err(|e| Error::io(manifest, e))?;
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (rel, label) = line.rsplit_once(',').ok_or_else(|| {
            Error::Dataset(format!("manifest line {}: expected `path,label`", lineno + 1))
        })?;
        let (rel, label) = (rel.trim(), label.trim());
        if rel.is_empty() || label.is_empty() {
            return Err(Error::Dataset(format!(
                "manifest line {}: empty path or label",
                lineno + 1
            )));
        }
        let path = root.join(rel);
        if !path.is_file() {
            return Err(Error::Dataset(format!(
                "manifest line {} references missing file {}",
                lineno + 1,
                path.display()
            )));
        }
        entries.push(Entry {
            class: label.to_string(),
            name: rel.to_string(),
            path,
        });
    }
    Ok(entries)
}

fn scan_entries(root: &Path) -> Result<Vec<Entry>> {
    let read = |dir: &Path| -> Result<Vec<PathBuf>> {
        let mut out = Vec::new();
        for e in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
            out.push(e.map_err(|e| Error::io(dir, e))?.path());
        }
        Ok(out)
    };
    let children = read(root)?;

    let coil: Vec<Entry> = children
        .iter()
        .filter(|p| p.is_file())
        .filter_map(|p| {
            let file = p.file_name()?.to_str()?;
            let (obj, _) = parse_coil_name(file)?;
            Some(Entry {
                class: obj.to_string(),
                name: file.to_string(),
                path: p.clone(),
            })
        })
        .collect();
    if !coil.is_empty() {
        return Ok(coil);
    }

    let mut entries = Vec::new();
    for dir in children.iter().filter(|p| p.is_dir()) {
        let Some(class) = dir.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        for file in read(dir)? {
            if file.is_file() && has_image_extension(&file) {
                let name = format!("{class}/{}", file.file_name().unwrap().to_string_lossy());
                entries.push(Entry {
                    class: class.to_string(),
                    name,
                    path: file,
                });
            }
        }
    }
    Ok(entries)
}
