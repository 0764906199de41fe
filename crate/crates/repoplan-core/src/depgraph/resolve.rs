//! Static name resolution over the repository: import bindings, class
//! hierarchy, receiver typing and reference-to-block resolution.
//!
//! Resolution is purely static — no aliasing beyond `import x as y`, no
//! reflection. Receiver dispatch uses class-hierarchy analysis: the static
//! receiver type is widened over its subclasses and an edge target is
//! produced for every candidate definition (may-analysis).

use crate::syntax::{
    scan_refs, BlockId, BlockKind, CallArgs, DeclInfo, ExprRef, Repository,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::collections::BTreeSet;

/// Builtin names that never produce edges or diagnostics.
pub const BUILTINS: &[&str] = &[
    "print", "len", "range", "str", "int", "float", "bool", "dict", "list", "set", "tuple",
    "super", "isinstance", "abs", "min", "max", "sum", "enumerate", "sorted", "repr", "type",
    "object", "Exception", "ValueError", "KeyError",
];

/// How a name is bound within one file's scope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// `import m` / `import m as a` — the bound name denotes a module.
    Module { module: String, import: BlockId },
    /// `from m import n [as a]` — the bound name denotes symbol `n` of `m`.
    Symbol { module: String, name: String, import: BlockId },
    /// Class defined in the same file.
    LocalClass(BlockId),
    /// Function defined at the top level of the same file.
    LocalFunc(BlockId),
}

/// Aggregated facts about one class.
#[derive(Debug, Clone, Default)]
pub struct ClassInfo {
    pub id: Option<BlockId>,
    pub base: Option<BlockId>,
    /// Base name that did not resolve to a repository class (external).
    pub external_base: Option<String>,
    pub fields: BTreeMap<String, BlockId>,
    pub methods: BTreeMap<String, BlockId>,
    pub ctor: Option<BlockId>,
}

/// A non-fatal resolution event (unresolvable callee or class name).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionWarning {
    pub block: BlockId,
    pub name: String,
    pub message: String,
}

/// What a reference resolved to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Target {
    /// Call dispatched to one or more candidate methods (CHA widening).
    Methods(Vec<BlockId>),
    Function(BlockId),
    /// Object instantiation of a class.
    Class(BlockId),
    Field(BlockId),
    /// Bound via an import whose module is outside the repository.
    External,
    Builtin,
    /// Plain local/parameter use.
    Local,
    /// Member access on a statically known class that lacks the member.
    UnknownMember(BlockId),
    /// Member access on a local/parameter whose type is statically unknown.
    UntypedReceiver,
    /// Head name has no binding at all.
    Unresolved,
}

/// One resolved reference: the target plus the import binding it went
/// through, when any.
#[derive(Debug, Clone)]
pub struct ResolvedRef {
    pub target: Target,
    pub via_import: Option<BlockId>,
    pub call: Option<CallArgs>,
    pub line: usize,
    pub path: Vec<String>,
}

/// Symbol tables computed from a parsed repository.
#[derive(Debug, Clone)]
pub struct Resolver<'r> {
    repo: &'r Repository,
    /// module name -> file path
    modules: BTreeMap<String, String>,
    /// file -> bound name -> binding
    bindings: BTreeMap<String, BTreeMap<String, Binding>>,
    /// file -> class name -> class block
    classes: BTreeMap<String, BTreeMap<String, BlockId>>,
    /// file -> function name -> method block (top level only)
    functions: BTreeMap<String, BTreeMap<String, BlockId>>,
    class_info: BTreeMap<BlockId, ClassInfo>,
    /// class -> direct subclasses
    subclasses: BTreeMap<BlockId, Vec<BlockId>>,
}

impl<'r> Resolver<'r> {
    pub fn new(repo: &'r Repository) -> Self {
        let mut modules = BTreeMap::new();
        let mut bindings: BTreeMap<String, BTreeMap<String, Binding>> = BTreeMap::new();
        let mut classes: BTreeMap<String, BTreeMap<String, BlockId>> = BTreeMap::new();
        let mut functions: BTreeMap<String, BTreeMap<String, BlockId>> = BTreeMap::new();
        let mut class_info: BTreeMap<BlockId, ClassInfo> = BTreeMap::new();

        for path in repo.file_paths() {
            modules.insert(Repository::module_name(path), path.to_string());
        }

        for path in repo.file_paths().map(str::to_string).collect::<Vec<_>>() {
            let file_bindings = bindings.entry(path.clone()).or_default();
            for block in repo.blocks_of_file(&path) {
                match repo.decl(&block.id) {
                    Some(DeclInfo::Import(imp)) => {
                        if imp.is_from {
                            for (name, alias) in &imp.names {
                                let bound = alias.clone().unwrap_or_else(|| name.clone());
                                file_bindings.insert(
                                    bound,
                                    Binding::Symbol {
                                        module: imp.module.clone(),
                                        name: name.clone(),
                                        import: block.id.clone(),
                                    },
                                );
                            }
                        } else {
                            let bound =
                                imp.alias.clone().unwrap_or_else(|| imp.module.clone());
                            file_bindings.insert(
                                bound,
                                Binding::Module {
                                    module: imp.module.clone(),
                                    import: block.id.clone(),
                                },
                            );
                        }
                    }
                    Some(DeclInfo::Class(c)) => {
                        classes
                            .entry(path.clone())
                            .or_default()
                            .insert(c.name.clone(), block.id.clone());
                        file_bindings
                            .insert(c.name.clone(), Binding::LocalClass(block.id.clone()));
                        class_info.entry(block.id.clone()).or_default().id =
                            Some(block.id.clone());
                    }
                    Some(DeclInfo::Func(f))
                        if block.parent.as_ref().map(|p| p.kind) == Some(BlockKind::Module) =>
                    {
                        functions
                            .entry(path.clone())
                            .or_default()
                            .insert(f.name.clone(), block.id.clone());
                        file_bindings
                            .insert(f.name.clone(), Binding::LocalFunc(block.id.clone()));
                    }
                    _ => {}
                }
            }
        }

        let mut resolver = Resolver {
            repo,
            modules,
            bindings,
            classes,
            functions,
            class_info,
            subclasses: BTreeMap::new(),
        };
        resolver.fill_class_members();
        resolver
    }

    fn fill_class_members(&mut self) {
        let class_ids: Vec<BlockId> = self.class_info.keys().cloned().collect();
        for class_id in class_ids {
            let mut info = ClassInfo { id: Some(class_id.clone()), ..Default::default() };
            for child in self.repo.children(&class_id) {
                match child.kind {
                    BlockKind::Field => {
                        let name = match self.repo.decl(&child.id) {
                            Some(DeclInfo::Field(f)) => f.name.clone(),
                            _ => continue,
                        };
                        info.fields.entry(name).or_insert_with(|| child.id.clone());
                    }
                    BlockKind::Method => {
                        let name = match self.repo.decl(&child.id) {
                            Some(DeclInfo::Func(f)) => f.name.clone(),
                            _ => continue,
                        };
                        info.methods.entry(name).or_insert_with(|| child.id.clone());
                    }
                    BlockKind::Constructor => {
                        info.ctor.get_or_insert_with(|| child.id.clone());
                    }
                    _ => {}
                }
            }
            if let Some(DeclInfo::Class(c)) = self.repo.decl(&class_id) {
                if let Some(base_name) = &c.base {
                    match self.resolve_class_name(&class_id.file, base_name) {
                        Some(base_id) => info.base = Some(base_id),
                        None => info.external_base = Some(base_name.clone()),
                    }
                }
            }
            self.class_info.insert(class_id, info);
        }
        let mut subclasses: BTreeMap<BlockId, Vec<BlockId>> = BTreeMap::new();
        for (id, info) in &self.class_info {
            if let Some(base) = &info.base {
                subclasses.entry(base.clone()).or_default().push(id.clone());
            }
        }
        self.subclasses = subclasses;
    }

    pub fn class_info(&self, class: &BlockId) -> Option<&ClassInfo> {
        self.class_info.get(class)
    }

    pub fn classes(&self) -> impl Iterator<Item = (&BlockId, &ClassInfo)> {
        self.class_info.iter()
    }

    pub fn binding(&self, file: &str, name: &str) -> Option<&Binding> {
        self.bindings.get(file).and_then(|m| m.get(name))
    }

    /// Resolve a possibly dotted class name within `file`'s scope.
    pub fn resolve_class_name(&self, file: &str, name: &str) -> Option<BlockId> {
        if let Some((head, rest)) = name.split_once('.') {
            if let Some(Binding::Module { module, .. }) = self.binding(file, head) {
                let target_file = self.modules.get(module)?;
                return self.classes.get(target_file)?.get(rest).cloned();
            }
            return None;
        }
        match self.binding(file, name) {
            Some(Binding::LocalClass(id)) => Some(id.clone()),
            Some(Binding::Symbol { module, name: sym, .. }) => {
                let target_file = self.modules.get(module)?;
                self.classes.get(target_file)?.get(sym).cloned()
            }
            _ => self.classes.get(file)?.get(name).cloned(),
        }
    }

    /// Walk `class` and its ancestors; first class defining method `name`.
    pub fn lookup_method(&self, class: &BlockId, name: &str) -> Option<BlockId> {
        let mut cur = Some(class.clone());
        let mut hops = 0;
        while let Some(c) = cur {
            if hops > 32 {
                return None; // inheritance cycle guard
            }
            let info = self.class_info.get(&c)?;
            if name == "__init__" {
                if let Some(ctor) = &info.ctor {
                    return Some(ctor.clone());
                }
            }
            if let Some(m) = info.methods.get(name) {
                return Some(m.clone());
            }
            cur = info.base.clone();
            hops += 1;
        }
        None
    }

    /// Walk `class` and its ancestors; first class declaring field `name`.
    pub fn lookup_field(&self, class: &BlockId, name: &str) -> Option<BlockId> {
        let mut cur = Some(class.clone());
        let mut hops = 0;
        while let Some(c) = cur {
            if hops > 32 {
                return None;
            }
            let info = self.class_info.get(&c)?;
            if let Some(f) = info.fields.get(name) {
                return Some(f.clone());
            }
            cur = info.base.clone();
            hops += 1;
        }
        None
    }

    /// `class` plus all transitive subclasses.
    pub fn hierarchy_cone(&self, class: &BlockId) -> Vec<BlockId> {
        let mut out = vec![class.clone()];
        let mut i = 0;
        while i < out.len() {
            if let Some(subs) = self.subclasses.get(&out[i]) {
                for s in subs {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
            }
            i += 1;
        }
        out
    }

    /// All classes related to `class` through the hierarchy (ancestors and
    /// the full cone below each).
    pub fn hierarchy_family(&self, class: &BlockId) -> Vec<BlockId> {
        let mut root = class.clone();
        let mut hops = 0;
        while let Some(base) = self.class_info.get(&root).and_then(|i| i.base.clone()) {
            if hops > 32 {
                break;
            }
            root = base;
            hops += 1;
        }
        self.hierarchy_cone(&root)
    }

    /// May-dispatch: candidate method definitions for a call of `name` on a
    /// receiver statically typed `class`, widened over the hierarchy cone.
    pub fn dispatch_candidates(&self, class: &BlockId, name: &str) -> Vec<BlockId> {
        let mut out = Vec::new();
        for t in self.hierarchy_cone(class) {
            if let Some(m) = self.lookup_method(&t, name) {
                if !out.contains(&m) {
                    out.push(m);
                }
            }
        }
        out
    }

    /// Method override pairs `(overriding, overridden)` across the hierarchy.
    pub fn override_pairs(&self) -> Vec<(BlockId, BlockId)> {
        let mut pairs = Vec::new();
        for (class_id, info) in &self.class_info {
            let Some(base) = &info.base else { continue };
            for (name, method) in &info.methods {
                if let Some(overridden) = self.lookup_method(base, name) {
                    pairs.push((method.clone(), overridden.clone()));
                }
            }
            let _ = class_id;
        }
        pairs
    }

    /// Return type of a function/method when its annotation names a
    /// repository class.
    pub fn return_class(&self, func: &BlockId) -> Option<BlockId> {
        match self.repo.decl(func) {
            Some(DeclInfo::Func(f)) => {
                let ann = f.return_annotation.as_deref()?;
                self.resolve_class_name(&func.file, ann)
            }
            _ => None,
        }
    }

    /// Static type of a field, from its annotation or `ClassName(...)`
    /// initializer.
    pub fn field_class(&self, field: &BlockId) -> Option<BlockId> {
        let decl = match self.repo.decl(field) {
            Some(DeclInfo::Field(f)) => f,
            _ => return None,
        };
        if let Some(ann) = &decl.annotation {
            if let Some(c) = self.resolve_class_name(&field.file, ann) {
                return Some(c);
            }
        }
        let value = decl.value.as_deref()?;
        let refs = scan_refs(value);
        let first = refs.first()?;
        if first.call.is_some() {
            return self.type_of_callable(&field.file, &first.path);
        }
        None
    }

    /// Type produced by calling the given path (class construction or a
    /// function with a class return annotation).
    fn type_of_callable(&self, file: &str, path: &[String]) -> Option<BlockId> {
        match path {
            [single] => match self.binding(file, single) {
                Some(Binding::LocalClass(c)) => Some(c.clone()),
                Some(Binding::LocalFunc(f)) => self.return_class(f),
                Some(Binding::Symbol { module, name, .. }) => {
                    let tf = self.modules.get(module)?;
                    if let Some(c) = self.classes.get(tf).and_then(|m| m.get(name)) {
                        Some(c.clone())
                    } else if let Some(f) = self.functions.get(tf).and_then(|m| m.get(name)) {
                        self.return_class(f)
                    } else {
                        None
                    }
                }
                _ => {
                    if let Some(c) = self.classes.get(file).and_then(|m| m.get(single)) {
                        Some(c.clone())
                    } else if let Some(f) = self.functions.get(file).and_then(|m| m.get(single)) {
                        self.return_class(f)
                    } else {
                        None
                    }
                }
            },
            [head, rest] => match self.binding(file, head) {
                Some(Binding::Module { module, .. }) => {
                    let tf = self.modules.get(module)?;
                    if let Some(c) = self.classes.get(tf).and_then(|m| m.get(rest)) {
                        Some(c.clone())
                    } else if let Some(f) = self.functions.get(tf).and_then(|m| m.get(rest)) {
                        self.return_class(f)
                    } else {
                        None
                    }
                }
                _ => None,
            },
            _ => None,
        }
    }

    /// Infer static class types for locals of a carrier body, line by line.
    pub fn local_types(
        &self,
        file: &str,
        body_text: &str,
        params: &[crate::syntax::Param],
        enclosing_class: Option<&BlockId>,
    ) -> BTreeMap<String, BlockId> {
        let mut env: BTreeMap<String, BlockId> = BTreeMap::new();
        for p in params {
            if let Some(ann) = &p.annotation {
                if let Some(c) = self.resolve_class_name(file, ann) {
                    env.insert(p.name.clone(), c);
                }
            }
        }
        for line in body_text.lines() {
            let Some((lhs, rhs)) = super::split_assign_line(line) else { continue };
            let lhs = lhs.trim();
            if !lhs.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') || lhs.is_empty() {
                continue;
            }
            if let Some(ty) = self.expr_class(file, rhs.trim(), &env, enclosing_class) {
                env.insert(lhs.to_string(), ty);
            }
        }
        env
    }

    /// Static class of an expression text, under `env` local typing.
    pub fn expr_class(
        &self,
        file: &str,
        expr: &str,
        env: &BTreeMap<String, BlockId>,
        enclosing_class: Option<&BlockId>,
    ) -> Option<BlockId> {
        let refs = scan_refs(expr);
        let first = refs.first()?;
        self.ref_class(file, first, env, enclosing_class)
    }

    fn ref_class(
        &self,
        file: &str,
        r: &ExprRef,
        env: &BTreeMap<String, BlockId>,
        enclosing_class: Option<&BlockId>,
    ) -> Option<BlockId> {
        if r.call.is_some() {
            match r.path.as_slice() {
                [_single] => self.type_of_callable(file, &r.path),
                [head, meth] => {
                    if head == "self" {
                        let class = enclosing_class?;
                        let m = self.lookup_method(class, meth)?;
                        self.return_class(&m)
                    } else if let Some(class) = env.get(head) {
                        let m = self.lookup_method(class, meth)?;
                        self.return_class(&m)
                    } else {
                        self.type_of_callable(file, &r.path)
                    }
                }
                _ => None,
            }
        } else {
            match r.path.as_slice() {
                [single] => env.get(single).cloned(),
                [head, attr] => {
                    let class = if head == "self" {
                        enclosing_class.cloned()?
                    } else {
                        env.get(head).cloned()?
                    };
                    let field = self.lookup_field(&class, attr)?;
                    self.field_class(&field)
                }
                _ => None,
            }
        }
    }

    /// Resolve one reference from a carrier in `file`.
    pub fn resolve_ref(
        &self,
        file: &str,
        r: &ExprRef,
        env: &BTreeMap<String, BlockId>,
        enclosing_class: Option<&BlockId>,
        locals: &BTreeSet<String>,
    ) -> ResolvedRef {
        let mk = |target: Target, via: Option<BlockId>| ResolvedRef {
            target,
            via_import: via,
            call: r.call.clone(),
            line: r.line,
            path: r.path.clone(),
        };

        let head = &r.path[0];
        // `self.*`
        if head == "self" {
            let Some(class) = enclosing_class else {
                return mk(Target::Unresolved, None);
            };
            return match r.path.as_slice() {
                [_] => mk(Target::Local, None),
                [_, member] => self.member_on_class(class, member, r, mk),
                [_, field, member] => {
                    // self.field.member — receiver typed via the field
                    let Some(fid) = self.lookup_field(class, field) else {
                        return mk(Target::UnknownMember(class.clone()), None);
                    };
                    let Some(ftype) = self.field_class(&fid) else {
                        return mk(Target::UntypedReceiver, None);
                    };
                    self.member_on_class(&ftype, member, r, mk)
                }
                _ => mk(Target::UntypedReceiver, None),
            };
        }

        // Local or parameter receiver
        if locals.contains(head) || env.contains_key(head) {
            return match r.path.as_slice() {
                [_] => mk(Target::Local, None),
                [_, member] => match env.get(head) {
                    Some(class) => {
                        let class = class.clone();
                        self.member_on_class(&class, member, r, mk)
                    }
                    None => mk(Target::UntypedReceiver, None),
                },
                _ => mk(Target::UntypedReceiver, None),
            };
        }

        // Module-scope binding
        match self.binding(file, head) {
            Some(Binding::Module { module, import }) => {
                let import = import.clone();
                let Some(target_file) = self.modules.get(module) else {
                    return mk(Target::External, Some(import));
                };
                match r.path.as_slice() {
                    [_] => mk(Target::Local, Some(import)),
                    [_, member] => {
                        if let Some(c) = self.classes.get(target_file).and_then(|m| m.get(member))
                        {
                            mk(Target::Class(c.clone()), Some(import))
                        } else if let Some(f) =
                            self.functions.get(target_file).and_then(|m| m.get(member))
                        {
                            mk(Target::Function(f.clone()), Some(import))
                        } else {
                            mk(Target::Unresolved, Some(import))
                        }
                    }
                    _ => mk(Target::Unresolved, Some(import)),
                }
            }
            Some(Binding::Symbol { module, name, import }) => {
                let import = import.clone();
                let Some(target_file) = self.modules.get(module) else {
                    return mk(Target::External, Some(import));
                };
                if let Some(c) = self.classes.get(target_file).and_then(|m| m.get(name)) {
                    let c = c.clone();
                    match r.path.as_slice() {
                        [_] => {
                            if r.call.is_some() {
                                mk(Target::Class(c), Some(import))
                            } else {
                                // bare class mention (annotation-like) — no edge
                                mk(Target::Local, Some(import))
                            }
                        }
                        [_, member] => self.member_on_class(&c, member, r, mk),
                        _ => mk(Target::Unresolved, Some(import)),
                    }
                } else if let Some(f) = self.functions.get(target_file).and_then(|m| m.get(name)) {
                    mk(Target::Function(f.clone()), Some(import))
                } else {
                    mk(Target::Unresolved, Some(import))
                }
            }
            Some(Binding::LocalClass(c)) => {
                let c = c.clone();
                match r.path.as_slice() {
                    [_] => {
                        if r.call.is_some() {
                            mk(Target::Class(c), None)
                        } else {
                            mk(Target::Local, None)
                        }
                    }
                    [_, member] => self.member_on_class(&c, member, r, mk),
                    _ => mk(Target::Unresolved, None),
                }
            }
            Some(Binding::LocalFunc(f)) => mk(Target::Function(f.clone()), None),
            None => {
                if BUILTINS.contains(&head.as_str()) {
                    mk(Target::Builtin, None)
                } else if r.call.is_some() || r.path.len() >= 2 {
                    mk(Target::Unresolved, None)
                } else {
                    // bare unknown name in expression position
                    mk(Target::Unresolved, None)
                }
            }
        }
    }

    fn member_on_class(
        &self,
        class: &BlockId,
        member: &str,
        r: &ExprRef,
        mk: impl Fn(Target, Option<BlockId>) -> ResolvedRef,
    ) -> ResolvedRef {
        // A hierarchy rooted outside the repository may define the member;
        // stay silent rather than over-report.
        let externally_rooted = self.hierarchy_external(class);
        if r.call.is_some() {
            let candidates = self.dispatch_candidates(class, member);
            if candidates.is_empty() {
                if externally_rooted {
                    mk(Target::External, None)
                } else {
                    mk(Target::UnknownMember(class.clone()), None)
                }
            } else {
                mk(Target::Methods(candidates), None)
            }
        } else {
            match self.lookup_field(class, member) {
                Some(f) => mk(Target::Field(f), None),
                None => {
                    if externally_rooted {
                        mk(Target::External, None)
                    } else {
                        mk(Target::UnknownMember(class.clone()), None)
                    }
                }
            }
        }
    }

    /// True when the class or one of its ancestors extends a base outside
    /// the repository.
    fn hierarchy_external(&self, class: &BlockId) -> bool {
        let mut cur = Some(class.clone());
        let mut hops = 0;
        while let Some(c) = cur {
            if hops > 32 {
                return false;
            }
            match self.class_info.get(&c) {
                Some(info) => {
                    if info.external_base.is_some() {
                        return true;
                    }
                    cur = info.base.clone();
                }
                None => return false,
            }
            hops += 1;
        }
        false
    }
}
