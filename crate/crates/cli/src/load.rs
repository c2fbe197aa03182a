//! Reading group and element files named on the command line.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use symthompson::campaign::standard_configurations;
use symthompson::element::{ElementHeader, ElementText};
use symthompson::{GroupOptions, LocalGroup, SymTreePair};

use crate::{Failure, Global};

pub struct LoadedElement {
    pub element: SymTreePair,
    pub header: Option<ElementHeader>,
}

pub struct Loader {
    global: Global,
    groups: HashMap<PathBuf, Arc<LocalGroup>>,
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

impl Loader {
    pub fn new(global: Global) -> Self {
        Loader {
            global,
            groups: HashMap::new(),
        }
    }

    fn options(&self) -> GroupOptions {
        let mut o = GroupOptions::default();
        if let Some(d) = self.global.depth_limit {
            o.depth_limit = d;
        }
        o
    }

    fn group_file(&mut self, path: &Path) -> Result<Arc<LocalGroup>, Failure> {
        if let Some(g) = self.groups.get(path) {
            return Ok(g.clone());
        }
        let text = read(path)?;
        let (d, n, gens) =
            LocalGroup::parse(&text).map_err(|e| Failure::input(format!("{}:{e}", path.display())))?;
        let name = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
        let g = LocalGroup::build_with(d, n, gens, self.options())
            .map_err(|e| Failure::from(e).context(&path.display().to_string()))?
            .with_name(name);
        self.groups.insert(path.to_path_buf(), g.clone());
        Ok(g)
    }

    /// The group for commands that take no element file: `--group`, then
    /// `--preset`, then the trivial group of arity `--arity`.
    pub fn standalone_group(&mut self) -> Result<(String, Arc<LocalGroup>), Failure> {
        if let Some(p) = self.global.group.clone() {
            let g = self.group_file(&p)?;
            return Ok((g.name().unwrap_or("group").to_string(), g));
        }
        if let Some(name) = self.global.preset.clone() {
            let configs = standard_configurations()?;
            let names: Vec<_> = configs.iter().map(|(n, _)| n.clone()).collect();
            let (n, g) = configs
                .into_iter()
                .find(|(n, _)| *n == name)
                .ok_or_else(|| Failure::input(format!("unknown preset {name}; known: {}", names.join(", "))))?;
            return Ok((n, self.with_options(g)?));
        }
        let d = self.global.arity;
        let g = LocalGroup::trivial(d)?;
        Ok((format!("d{d}-trivial"), self.with_options(g)?))
    }

    // presets are built with default options; rebuild when a depth limit is given
    fn with_options(&self, g: Arc<LocalGroup>) -> Result<Arc<LocalGroup>, Failure> {
        if self.global.depth_limit.is_none() {
            return Ok(g);
        }
        let name = g.name().map(str::to_string);
        let rebuilt = LocalGroup::build_with(g.arity(), g.degree(), g.generators().to_vec(), self.options())?;
        Ok(match name {
            Some(n) => rebuilt.with_name(n),
            None => rebuilt,
        })
    }

    /// Header paths are tried next to the element file first, then relative
    /// to the working directory.
    fn resolve(element_path: &Path, header_path: &str) -> PathBuf {
        let p = Path::new(header_path);
        if p.is_absolute() {
            return p.to_path_buf();
        }
        let beside = element_path.parent().unwrap_or(Path::new("")).join(p);
        if beside.exists() {
            beside
        } else {
            p.to_path_buf()
        }
    }

    fn source_group(&mut self, path: &Path, header: &Option<ElementHeader>) -> Result<Arc<LocalGroup>, Failure> {
        match header {
            Some(h) => {
                let resolved = Self::resolve(path, h.path());
                self.group_file(&resolved)
            }
            None => Ok(self.standalone_group()?.1),
        }
    }

    fn build(path: &Path, text: &ElementText, group: &Arc<LocalGroup>) -> Result<SymTreePair, Failure> {
        text.build(group).map_err(|e| Failure::input(format!("{}:{e}", path.display())))
    }

    fn parse(path: &Path) -> Result<ElementText, Failure> {
        ElementText::parse(&read(path)?).map_err(|e| Failure::input(format!("{}:{e}", path.display())))
    }

    /// An element over the group its header names (or the fallback group).
    pub fn element(&mut self, path: &Path) -> Result<LoadedElement, Failure> {
        let text = Self::parse(path)?;
        let source = self.source_group(path, &text.header)?;
        let group = match text.header {
            Some(ElementHeader::Image(_)) => source.image_group(),
            _ => source,
        };
        Ok(LoadedElement {
            element: Self::build(path, &text, &group)?,
            header: text.header,
        })
    }

    /// An element over the image group together with the group it should be
    /// lifted to.
    pub fn image_element(&mut self, path: &Path) -> Result<(SymTreePair, Arc<LocalGroup>, Option<ElementHeader>), Failure> {
        let text = Self::parse(path)?;
        if let Some(ElementHeader::Group(_)) = text.header {
            return Err(Failure::input(format!(
                "{}: section expects an `image <group file>` header",
                path.display()
            )));
        }
        let source = self.source_group(path, &text.header)?;
        let v = Self::build(path, &text, &source.image_group())?;
        let header = text.header.map(|h| ElementHeader::Group(h.path().to_string()));
        Ok((v, source, header))
    }
}
