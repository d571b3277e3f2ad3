use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::plots::{
    build_plot_spec, builtin_schema, validate_builtin, ConfigSchema, ConfigValidator, InteractionHints,
    InteractionState, PlotConfig, PlotError, PlotSpec, BUILTIN_KINDS, PLOTSPEC_SCHEMA_VERSION,
};
use crate::table::{AuxColumn, Table};

pub const CAP_EXTENDED_FORMATS: &str = "ingest.extended-formats";
pub const CAP_CSV: &str = "ingest.csv";
pub const CAP_SVG: &str = "render.svg";

/// Optional features available in this build. Fixed once constructed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapabilityFlags(BTreeSet<String>);

impl CapabilityFlags {
    pub fn detect() -> Self {
        let mut set: BTreeSet<String> = [CAP_CSV, CAP_SVG].iter().map(|s| s.to_string()).collect();
        if cfg!(feature = "extended-formats") {
            set.insert(CAP_EXTENDED_FORMATS.to_string());
        }
        Self(set)
    }

    pub fn has(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }
}

impl<S: Into<String>> FromIterator<S> for CapabilityFlags {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(Into::into).collect())
    }
}

/// Resolved data a plugin plot hands back; the engine wraps it in a [`PlotSpec`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotBody {
    pub series: Value,
    pub encodings: Value,
    pub warnings: Vec<String>,
}

/// Spec builder for a plugin plot kind. Called with settings that already
/// passed the kind's schema.
pub trait PlotHook: Send + Sync {
    fn build(
        &self,
        table: &Table,
        state: &InteractionState,
        settings: &Map<String, Value>,
    ) -> Result<PlotBody, PlotError>;
}

/// Analytics procedure provided by a plugin. Returns aux columns to attach.
pub trait AnalyticsHook: Send + Sync {
    fn run(&self, table: &Table, state: &InteractionState, params: &Value) -> Result<Vec<AuxColumn>, String>;
}

/// Compiled-in hook implementations that manifests refer to by id.
#[derive(Clone, Default)]
pub struct HookTable {
    plots: BTreeMap<String, Arc<dyn PlotHook>>,
    analytics: BTreeMap<String, Arc<dyn AnalyticsHook>>,
}

impl fmt::Debug for HookTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HookTable")
            .field("plots", &self.plots.keys().collect::<Vec<_>>())
            .field("analytics", &self.analytics.keys().collect::<Vec<_>>())
            .finish()
    }
}

impl HookTable {
    pub fn add_plot(&mut self, id: impl Into<String>, hook: Arc<dyn PlotHook>) {
        self.plots.insert(id.into(), hook);
    }

    pub fn add_analytics(&mut self, id: impl Into<String>, hook: Arc<dyn AnalyticsHook>) {
        self.analytics.insert(id.into(), hook);
    }

    pub fn extend(&mut self, other: HookTable) {
        self.plots.extend(other.plots);
        self.analytics.extend(other.analytics);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlotKindDecl {
    pub kind: String,
    pub schema: Vec<crate::plots::FieldSpec>,
    /// Hook id of the spec builder.
    pub builder: String,
    #[serde(default)]
    pub hints: InteractionHints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticsDecl {
    pub name: String,
    pub hook: String,
}

/// Contents of a `*.plugin.json` registration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PluginManifest {
    pub plugin_name: String,
    #[serde(default)]
    pub version: Option<String>,
    #[serde(default)]
    pub plot_kinds: Vec<PlotKindDecl>,
    #[serde(default)]
    pub analytics: Vec<AnalyticsDecl>,
    #[serde(default)]
    pub requires: Vec<String>,
}

impl PluginManifest {
    pub fn from_json(raw: &str) -> Result<Self, RegistryError> {
        serde_json::from_str(raw).map_err(|e| RegistryError::MalformedManifest(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("plot kind `{0}` is already registered")]
    DuplicateKind(String),
    #[error("malformed plugin manifest: {0}")]
    MalformedManifest(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PluginStatus {
    pub plugin_name: String,
    pub kinds: Vec<String>,
    pub enabled: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Clone)]
struct PluginKind {
    plugin: String,
    schema: ConfigSchema,
    hints: InteractionHints,
    builder: Arc<dyn PlotHook>,
    enabled: bool,
}

/// Known plot kinds and analytics hooks. Registration returns a new registry.
#[derive(Clone)]
pub struct PluginRegistry {
    capabilities: CapabilityFlags,
    hooks: HookTable,
    plugins: Vec<PluginStatus>,
    kinds: BTreeMap<String, PluginKind>,
    kind_order: Vec<String>,
    analytics: BTreeMap<String, (Arc<dyn AnalyticsHook>, bool)>,
}

impl fmt::Debug for PluginRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PluginRegistry")
            .field("capabilities", &self.capabilities)
            .field("plugins", &self.plugins)
            .finish()
    }
}

impl Default for PluginRegistry {
    fn default() -> Self {
        Self::new(CapabilityFlags::detect(), HookTable::default())
    }
}

/// One entry of `list_plot_kinds`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KindInfo {
    pub kind: String,
    pub builtin: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub plugin: Option<String>,
    pub schema: ConfigSchema,
}

impl PluginRegistry {
    pub fn new(capabilities: CapabilityFlags, hooks: HookTable) -> Self {
        Self {
            capabilities,
            hooks,
            plugins: Vec::new(),
            kinds: BTreeMap::new(),
            kind_order: Vec::new(),
            analytics: BTreeMap::new(),
        }
    }

    pub fn capabilities(&self) -> &CapabilityFlags {
        &self.capabilities
    }

    pub fn plugins(&self) -> &[PluginStatus] {
        &self.plugins
    }

    pub fn register(&self, manifest: PluginManifest) -> Result<PluginRegistry, RegistryError> {
        let malformed = |m: String| Err(RegistryError::MalformedManifest(m));
        if manifest.plugin_name.trim().is_empty() {
            return malformed("plugin_name is empty".into());
        }
        if self.plugins.iter().any(|p| p.plugin_name == manifest.plugin_name) {
            return malformed(format!("plugin `{}` is already registered", manifest.plugin_name));
        }
        let missing: Vec<&str> = manifest
            .requires
            .iter()
            .map(String::as_str)
            .filter(|c| !self.capabilities.has(c))
            .collect();
        let enabled = missing.is_empty();

        let mut next = self.clone();
        let mut seen = BTreeSet::new();
        for decl in &manifest.plot_kinds {
            if decl.kind.trim().is_empty() {
                return malformed("empty plot kind name".into());
            }
            if BUILTIN_KINDS.contains(&decl.kind.as_str()) || self.kinds.contains_key(&decl.kind) || !seen.insert(&decl.kind)
            {
                return Err(RegistryError::DuplicateKind(decl.kind.clone()));
            }
            let mut field_names = BTreeSet::new();
            for f in &decl.schema {
                if f.name == "kind" || !field_names.insert(&f.name) {
                    return malformed(format!("kind `{}`: bad or repeated field `{}`", decl.kind, f.name));
                }
            }
            let Some(builder) = self.hooks.plots.get(&decl.builder) else {
                return malformed(format!("kind `{}`: unknown builder hook `{}`", decl.kind, decl.builder));
            };
            next.kinds.insert(
                decl.kind.clone(),
                PluginKind {
                    plugin: manifest.plugin_name.clone(),
                    schema: ConfigSchema {
                        kind: decl.kind.clone(),
                        fields: decl.schema.clone(),
                    },
                    hints: decl.hints.clone(),
                    builder: builder.clone(),
                    enabled,
                },
            );
            next.kind_order.push(decl.kind.clone());
        }
        for a in &manifest.analytics {
            let Some(hook) = self.hooks.analytics.get(&a.hook) else {
                return malformed(format!("analytics `{}`: unknown hook `{}`", a.name, a.hook));
            };
            if next.analytics.contains_key(&a.name) {
                return malformed(format!("analytics `{}` is already registered", a.name));
            }
            next.analytics.insert(a.name.clone(), (hook.clone(), enabled));
        }
        next.plugins.push(PluginStatus {
            plugin_name: manifest.plugin_name.clone(),
            kinds: manifest.plot_kinds.iter().map(|k| k.kind.clone()).collect(),
            enabled,
            reason: (!enabled).then(|| format!("missing capabilities: {}", missing.join(", "))),
        });
        Ok(next)
    }

    /// Built-ins followed by enabled plugin kinds in registration order.
    pub fn list_kinds(&self) -> Vec<KindInfo> {
        let mut out: Vec<KindInfo> = BUILTIN_KINDS
            .iter()
            .map(|k| KindInfo {
                kind: k.to_string(),
                builtin: true,
                plugin: None,
                schema: builtin_schema(k).expect("built-in kinds have schemas"),
            })
            .collect();
        for name in &self.kind_order {
            let k = &self.kinds[name];
            if k.enabled {
                out.push(KindInfo {
                    kind: name.clone(),
                    builtin: false,
                    plugin: Some(k.plugin.clone()),
                    schema: k.schema.clone(),
                });
            }
        }
        out
    }

    pub fn hints(&self, config: &PlotConfig) -> InteractionHints {
        match config {
            PlotConfig::Custom(c) => self.kinds.get(&c.kind).map(|k| k.hints.clone()).unwrap_or_default(),
            builtin => crate::plots::hints_for(builtin),
        }
    }

    pub fn analytics_hook(&self, name: &str) -> Option<Result<&Arc<dyn AnalyticsHook>, String>> {
        self.analytics.get(name).map(|(hook, enabled)| {
            if *enabled {
                Ok(hook)
            } else {
                Err(format!("analytics `{name}` belongs to a disabled plugin"))
            }
        })
    }

    pub fn build_spec(
        &self,
        table: &Table,
        plot_id: &str,
        config: &PlotConfig,
        state: &InteractionState,
    ) -> Result<PlotSpec, PlotError> {
        let PlotConfig::Custom(custom) = config else {
            return build_plot_spec(table, plot_id, config, state);
        };
        self.validate(config, table)?;
        let kind = &self.kinds[&custom.kind];
        let body = kind.builder.build(table, state, &custom.settings)?;
        Ok(PlotSpec {
            schema_version: PLOTSPEC_SCHEMA_VERSION,
            plot_id: plot_id.to_string(),
            kind: custom.kind.clone(),
            series: body.series,
            encodings: body.encodings,
            interaction_hints: kind.hints.clone(),
            warnings: body.warnings,
        })
    }
}

impl ConfigValidator for PluginRegistry {
    fn validate(&self, config: &PlotConfig, table: &Table) -> Result<(), PlotError> {
        match config {
            PlotConfig::Custom(c) => match self.kinds.get(&c.kind) {
                Some(k) if k.enabled => k.schema.validate(&c.settings, table),
                Some(_) => Err(PlotError::InvalidSetting {
                    field: "kind".into(),
                    reason: format!("plot kind `{}` belongs to a disabled plugin", c.kind),
                }),
                None => Err(PlotError::UnknownKind(c.kind.clone())),
            },
            builtin => validate_builtin(builtin, table),
        }
    }
}
