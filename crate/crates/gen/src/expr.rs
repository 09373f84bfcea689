//! Expression generators: a type-directed generator whose output always
//! typechecks (inserting its own `has` guards before optional-attribute
//! access), and an untyped generator that sticks to schema-declared names
//! but obeys no type discipline.

use std::collections::BTreeMap;

use warden_core::{
    AttrDecl, BinOp, EntityType, EntityUid, Expr, PatElem, Pattern, Schema, Type, Var,
};
use warden_engine::RequestEnv;

use crate::cursor::ByteCursor;
use crate::world::{World, STR_POOL};

const LONG_POOL: [i64; 6] = [0, 1, -1, 7, i64::MAX, i64::MIN];

fn pattern_pool(c: &mut ByteCursor) -> Pattern {
    let lit = |s: &str| s.chars().map(PatElem::Literal).collect::<Vec<_>>();
    match c.choose(7) {
        0 => Pattern(vec![]),
        1 => Pattern(lit("a")),
        2 => Pattern(vec![PatElem::Wildcard]),
        3 => Pattern(vec![PatElem::Literal('a'), PatElem::Wildcard]),
        4 => {
            let mut elems = vec![PatElem::Wildcard];
            elems.extend(lit("b"));
            Pattern(elems)
        }
        5 => {
            let mut elems = lit("a");
            elems.push(PatElem::Wildcard);
            elems.extend(lit("b"));
            Pattern(elems)
        }
        _ => Pattern(vec![PatElem::Literal('*'), PatElem::Wildcard]),
    }
}

/// An attribute-access path known to typecheck (required attributes only,
/// or optional ones unlocked by a guard during generation).
#[derive(Debug, Clone)]
struct PathEntry {
    expr: Expr,
    ty: Type,
}

/// Type-directed generation state for one (world, environment) pair.
struct TypedGen<'w> {
    schema: &'w Schema,
    /// Store uids per entity type, action entities included.
    instances: BTreeMap<EntityType, Vec<EntityUid>>,
    /// Access paths from the request variables through required attributes.
    paths: Vec<PathEntry>,
    /// `(base path, attribute, type)` for reachable optional attributes.
    optionals: Vec<(Expr, String, Type)>,
}

impl<'w> TypedGen<'w> {
    fn new(world: &'w World, env: &RequestEnv) -> Self {
        let mut instances: BTreeMap<EntityType, Vec<EntityUid>> = BTreeMap::new();
        for (uid, _) in world.store.iter() {
            instances
                .entry(uid.entity_type().clone())
                .or_default()
                .push(uid.clone());
        }

        let mut gen = TypedGen {
            schema: &world.schema,
            instances,
            paths: Vec::new(),
            optionals: Vec::new(),
        };
        let roots = [
            (Expr::Var(Var::Principal), Type::Entity(env.principal_type.clone())),
            (
                Expr::Var(Var::Action),
                Type::Entity(env.action.entity_type().clone()),
            ),
            (Expr::Var(Var::Resource), Type::Entity(env.resource_type.clone())),
            (Expr::Var(Var::Context), Type::Record(env.context_shape.clone())),
        ];
        for (expr, ty) in roots {
            gen.add_path(expr, ty, 2);
        }
        gen
    }

    /// Registers a path and extends it through required attributes up to
    /// `hops` further levels; optional attributes land in `optionals`.
    fn add_path(&mut self, expr: Expr, ty: Type, hops: usize) {
        let attrs: Vec<(String, AttrDecl)> = match &ty {
            Type::Entity(name) => self
                .schema
                .entity_types
                .get(name)
                .map(|d| d.attributes.clone().into_iter().collect())
                .unwrap_or_default(),
            Type::Record(fields) => fields.clone().into_iter().collect(),
            _ => Vec::new(),
        };
        self.paths.push(PathEntry {
            expr: expr.clone(),
            ty,
        });
        for (name, decl) in attrs {
            if decl.required {
                if hops > 0 {
                    self.add_path(Expr::get_attr(expr.clone(), &name), decl.ty, hops - 1);
                }
            } else {
                self.optionals.push((expr.clone(), name, decl.ty));
            }
        }
    }

    fn paths_of(&self, ty: &Type) -> Vec<&PathEntry> {
        self.paths.iter().filter(|p| p.ty == *ty).collect()
    }

    /// Whether a literal of this exact type can be built: records with
    /// optional fields cannot (a record literal synthesizes all-required),
    /// so they are only reachable through paths.
    fn constructible(&self, ty: &Type) -> bool {
        match ty {
            Type::Bool | Type::Long | Type::String => true,
            Type::Entity(name) => self.instances.contains_key(name),
            Type::Set(elem) => self.constructible(elem),
            Type::Record(fields) => fields
                .values()
                .all(|d| d.required && self.constructible(&d.ty)),
        }
    }

    fn entity_types(&self) -> Vec<EntityType> {
        self.instances.keys().cloned().collect()
    }

    fn pick_entity_type(&self, c: &mut ByteCursor) -> EntityType {
        let types = self.entity_types();
        types[c.choose(types.len())].clone()
    }

    /// A leaf of the requested type: a literal, entity uid, or access path.
    fn leaf(&self, c: &mut ByteCursor, target: &Type) -> Expr {
        let paths = self.paths_of(target);
        match target {
            Type::Bool => {
                let n = 2 + paths.len();
                match c.choose(n) {
                    0 => Expr::lit_bool(false),
                    1 => Expr::lit_bool(true),
                    k => paths[k - 2].expr.clone(),
                }
            }
            Type::Long => {
                let n = LONG_POOL.len() + paths.len();
                let k = c.choose(n);
                if k < LONG_POOL.len() {
                    Expr::lit_long(LONG_POOL[k])
                } else {
                    paths[k - LONG_POOL.len()].expr.clone()
                }
            }
            Type::String => {
                let n = STR_POOL.len() + paths.len();
                let k = c.choose(n);
                if k < STR_POOL.len() {
                    Expr::lit_str(STR_POOL[k])
                } else {
                    paths[k - STR_POOL.len()].expr.clone()
                }
            }
            Type::Entity(name) => {
                let uids = self.instances.get(name).cloned().unwrap_or_default();
                let n = uids.len() + paths.len();
                if n == 0 {
                    // Undeclared-but-typeable entity type without instances;
                    // unreachable for generated targets.
                    return Expr::Var(Var::Principal);
                }
                let k = c.choose(n);
                if k < uids.len() {
                    Expr::EntityLit(uids[k].clone())
                } else {
                    paths[k - uids.len()].expr.clone()
                }
            }
            Type::Set(elem) => {
                let can_build = self.constructible(elem);
                if !paths.is_empty() && (c.flag() || !can_build) {
                    paths[c.choose(paths.len())].expr.clone()
                } else {
                    debug_assert!(can_build, "unconstructible set target without a path");
                    Expr::SetLit(vec![self.leaf(c, elem)])
                }
            }
            Type::Record(shape) => {
                if !paths.is_empty() {
                    return paths[c.choose(paths.len())].expr.clone();
                }
                debug_assert!(
                    self.constructible(target),
                    "unconstructible record target without a path"
                );
                Expr::RecordLit(
                    shape
                        .iter()
                        .map(|(name, decl)| (name.clone(), self.leaf(c, &decl.ty)))
                        .collect(),
                )
            }
        }
    }

    /// An operand type that is always constructible: a primitive, a declared
    /// entity type, a small set or record shape, or the type of some path.
    fn inner_target(&self, c: &mut ByteCursor) -> Type {
        match c.choose(8) {
            0 => Type::Bool,
            1 => Type::Long,
            2 => Type::String,
            3 => Type::Entity(self.pick_entity_type(c)),
            4 => Type::Set(Box::new(match c.choose(3) {
                0 => Type::Bool,
                1 => Type::Long,
                _ => Type::String,
            })),
            5 => Type::Record(
                [(
                    "x".to_string(),
                    AttrDecl::required(Type::Long),
                )]
                .into_iter()
                .collect(),
            ),
            _ => self.paths[c.choose(self.paths.len())].ty.clone(),
        }
    }

    fn gen(&mut self, c: &mut ByteCursor, target: &Type, depth: usize) -> Expr {
        if depth == 0 {
            return self.leaf(c, target);
        }
        match target {
            Type::Bool => self.gen_bool(c, depth),
            Type::Long => match c.choose(7) {
                0..=2 => self.leaf(c, target),
                3 => Expr::binop(
                    BinOp::Add,
                    self.gen(c, &Type::Long, depth - 1),
                    self.gen(c, &Type::Long, depth - 1),
                ),
                4 => Expr::binop(
                    BinOp::Sub,
                    self.gen(c, &Type::Long, depth - 1),
                    self.gen(c, &Type::Long, depth - 1),
                ),
                5 => Expr::neg(self.gen(c, &Type::Long, depth - 1)),
                _ => self.gen_if(c, target, depth),
            },
            Type::String => match c.choose(4) {
                0..=2 => self.leaf(c, target),
                _ => self.gen_if(c, target, depth),
            },
            Type::Entity(_) => match c.choose(4) {
                0..=2 => self.leaf(c, target),
                _ => self.gen_if(c, target, depth),
            },
            Type::Set(elem) => match c.choose(3) {
                0 => self.leaf(c, target),
                1 if self.constructible(elem) => {
                    let n = c.range(1, 3);
                    Expr::SetLit((0..n).map(|_| self.gen(c, elem, depth - 1)).collect())
                }
                1 => self.leaf(c, target),
                _ => self.gen_if(c, target, depth),
            },
            Type::Record(_) => match c.choose(2) {
                0 => self.leaf(c, target),
                _ => self.gen_if(c, target, depth),
            },
        }
    }

    fn gen_if(&mut self, c: &mut ByteCursor, target: &Type, depth: usize) -> Expr {
        Expr::ite(
            self.gen(c, &Type::Bool, depth - 1),
            self.gen(c, target, depth - 1),
            self.gen(c, target, depth - 1),
        )
    }

    fn gen_bool(&mut self, c: &mut ByteCursor, depth: usize) -> Expr {
        match c.choose(16) {
            0..=3 => self.leaf(c, &Type::Bool),
            4 => Expr::not(self.gen(c, &Type::Bool, depth - 1)),
            5 => Expr::and(
                self.gen(c, &Type::Bool, depth - 1),
                self.gen(c, &Type::Bool, depth - 1),
            ),
            6 => Expr::or(
                self.gen(c, &Type::Bool, depth - 1),
                self.gen(c, &Type::Bool, depth - 1),
            ),
            7 => self.gen_if(c, &Type::Bool, depth),
            8 | 9 => {
                // Equality; occasionally across unrelated operand types,
                // which is still well-typed.
                let op = if c.flag() { BinOp::Eq } else { BinOp::Neq };
                let t1 = self.inner_target(c);
                let t2 = if c.rare() { self.inner_target(c) } else { t1.clone() };
                Expr::binop(
                    op,
                    self.gen(c, &t1, depth - 1),
                    self.gen(c, &t2, depth - 1),
                )
            }
            10 => {
                let op = match c.choose(4) {
                    0 => BinOp::Lt,
                    1 => BinOp::Le,
                    2 => BinOp::Gt,
                    _ => BinOp::Ge,
                };
                Expr::binop(
                    op,
                    self.gen(c, &Type::Long, depth - 1),
                    self.gen(c, &Type::Long, depth - 1),
                )
            }
            11 => {
                let lhs_ty = Type::Entity(self.pick_entity_type(c));
                let lhs = self.gen(c, &lhs_ty, depth - 1);
                if c.flag() {
                    let rhs_ty = Type::Entity(self.pick_entity_type(c));
                    Expr::binop(BinOp::In, lhs, self.gen(c, &rhs_ty, depth - 1))
                } else {
                    let elem_ty = Type::Entity(self.pick_entity_type(c));
                    let n = c.range(1, 3);
                    let items = (0..n).map(|_| self.gen(c, &elem_ty, depth - 1)).collect();
                    Expr::binop(BinOp::In, lhs, Expr::SetLit(items))
                }
            }
            12 => {
                let mut elem = self.inner_target(c);
                let set_ty = Type::Set(Box::new(elem.clone()));
                if !self.constructible(&elem) && self.paths_of(&set_ty).is_empty() {
                    elem = Type::Long;
                }
                let set = self.gen(c, &Type::Set(Box::new(elem.clone())), depth - 1);
                Expr::binop(BinOp::Contains, set, self.gen(c, &elem, depth - 1))
            }
            13 => Expr::like(self.gen(c, &Type::String, depth - 1), pattern_pool(c)),
            14 => {
                // `has` on some entity or record path, any declared attribute.
                let mut hasable: Vec<(Expr, String)> = Vec::new();
                for entry in &self.paths {
                    match &entry.ty {
                        Type::Entity(name) => {
                            if let Some(decl) = self.schema.entity_types.get(name) {
                                for attr in decl.attributes.keys() {
                                    hasable.push((entry.expr.clone(), attr.clone()));
                                }
                            }
                        }
                        Type::Record(fields) => {
                            for attr in fields.keys() {
                                hasable.push((entry.expr.clone(), attr.clone()));
                            }
                        }
                        _ => {}
                    }
                }
                if hasable.is_empty() {
                    return self.leaf(c, &Type::Bool);
                }
                let (base, attr) = hasable[c.choose(hasable.len())].clone();
                Expr::has_attr(base, attr)
            }
            _ => {
                // Guarded optional access: `base has attr && <body using
                // base.attr>`.
                if self.optionals.is_empty() {
                    return self.leaf(c, &Type::Bool);
                }
                let (base, attr, ty) = self.optionals[c.choose(self.optionals.len())].clone();
                let unlocked = Expr::get_attr(base.clone(), &attr);
                self.paths.push(PathEntry {
                    expr: unlocked,
                    ty,
                });
                let body = self.gen(c, &Type::Bool, depth - 1);
                self.paths.pop();
                Expr::and(Expr::has_attr(base, attr), body)
            }
        }
    }
}

/// Generates an expression that typechecks to `target` in `env` starting
/// from an empty capability set. Depth 0 forces a leaf.
pub fn gen_expr(
    c: &mut ByteCursor,
    env: &RequestEnv,
    target: &Type,
    world: &World,
    depth: usize,
) -> Expr {
    TypedGen::new(world, env).gen(c, target, depth)
}

/// Like [`gen_expr`], but the root is never a bare literal or path: used as
/// the dedicated expression generator, which exists to produce structurally
/// interesting terms.
pub fn gen_expr_nontrivial(
    c: &mut ByteCursor,
    env: &RequestEnv,
    target: &Type,
    world: &World,
    depth: usize,
) -> Expr {
    let mut gen = TypedGen::new(world, env);
    let depth = depth.max(1);
    // A small fraction of unfiltered draws keeps the output distribution
    // honest; everything else skims leaf roots off by retrying.
    if c.rare() {
        return gen.gen(c, target, depth);
    }
    for _ in 0..4 {
        let expr = gen.gen(c, target, depth);
        if !matches!(expr, Expr::Lit(_) | Expr::Var(_) | Expr::GetAttr(..)) {
            return expr;
        }
    }
    // Terminal fallback: a structurally non-leaf expression of the target
    // type.
    match target {
        Type::Bool => Expr::not(gen.gen(c, &Type::Bool, depth - 1)),
        t => gen.gen_if(c, t, depth),
    }
}

/// Replaces one node of `expr` (chosen by the cursor) with a leaf of an
/// arbitrary type, producing a "mostly well-typed" term.
pub fn perturb_expr(c: &mut ByteCursor, expr: &Expr) -> Expr {
    let replacement = match c.choose(5) {
        0 => Expr::lit_long(0),
        1 => Expr::lit_bool(true),
        2 => Expr::lit_str("s"),
        3 => Expr::Var(Var::Principal),
        _ => Expr::SetLit(vec![]),
    };
    let target = c.choose(expr.size());
    let mut counter = 0usize;
    replace_at(expr, &mut counter, target, &replacement)
}

fn replace_at(e: &Expr, counter: &mut usize, target: usize, new: &Expr) -> Expr {
    if *counter == target {
        *counter += 1;
        return new.clone();
    }
    *counter += 1;
    let mut sub = |child: &Expr| replace_at(child, counter, target, new);
    match e {
        Expr::Lit(_) | Expr::EntityLit(_) | Expr::Var(_) => e.clone(),
        Expr::Not(a) => Expr::Not(Box::new(sub(a))),
        Expr::Neg(a) => Expr::Neg(Box::new(sub(a))),
        Expr::And(a, b) => {
            let a = sub(a);
            let b = sub(b);
            Expr::And(Box::new(a), Box::new(b))
        }
        Expr::Or(a, b) => {
            let a = sub(a);
            let b = sub(b);
            Expr::Or(Box::new(a), Box::new(b))
        }
        Expr::If(g, t, f) => {
            let g = sub(g);
            let t = sub(t);
            let f = sub(f);
            Expr::If(Box::new(g), Box::new(t), Box::new(f))
        }
        Expr::BinOp(op, a, b) => {
            let a = sub(a);
            let b = sub(b);
            Expr::BinOp(*op, Box::new(a), Box::new(b))
        }
        Expr::Like(a, p) => Expr::Like(Box::new(sub(a)), p.clone()),
        Expr::HasAttr(a, attr) => Expr::HasAttr(Box::new(sub(a)), attr.clone()),
        Expr::GetAttr(a, attr) => Expr::GetAttr(Box::new(sub(a)), attr.clone()),
        Expr::SetLit(items) => Expr::SetLit(items.iter().map(&mut sub).collect()),
        Expr::RecordLit(fields) => Expr::RecordLit(
            fields
                .iter()
                .map(|(k, v)| (k.clone(), sub(v)))
                .collect(),
        ),
    }
}

/// Untyped expression generation: every uid, action, and attribute name is
/// declared in the schema, but the conditions can be ill-typed.
pub fn gen_untyped_expr(c: &mut ByteCursor, world: &World, depth: usize) -> Expr {
    let attr_pool = declared_attr_names(&world.schema);
    let uid_pool: Vec<EntityUid> = world.store.iter().map(|(u, _)| u.clone()).collect();
    untyped(c, &attr_pool, &uid_pool, depth)
}

/// Every attribute name declared anywhere in the schema: entity attributes,
/// nested record fields, and context attributes.
fn declared_attr_names(schema: &Schema) -> Vec<String> {
    fn from_type(ty: &Type, out: &mut Vec<String>) {
        match ty {
            Type::Set(elem) => from_type(elem, out),
            Type::Record(fields) => {
                for (name, decl) in fields {
                    out.push(name.clone());
                    from_type(&decl.ty, out);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    for decl in schema.entity_types.values() {
        for (name, attr) in &decl.attributes {
            out.push(name.clone());
            from_type(&attr.ty, &mut out);
        }
    }
    for action in schema.actions.values() {
        for (name, attr) in &action.context_shape {
            out.push(name.clone());
            from_type(&attr.ty, &mut out);
        }
    }
    out.sort();
    out.dedup();
    out
}

fn untyped(c: &mut ByteCursor, attrs: &[String], uids: &[EntityUid], depth: usize) -> Expr {
    let leaf = |c: &mut ByteCursor| match c.choose(5) {
        0 => Expr::lit_bool(c.flag()),
        1 => Expr::lit_long(LONG_POOL[c.choose(LONG_POOL.len())]),
        2 => Expr::lit_str(STR_POOL[c.choose(STR_POOL.len())]),
        3 if !uids.is_empty() => Expr::EntityLit(uids[c.choose(uids.len())].clone()),
        _ => Expr::Var(match c.choose(4) {
            0 => Var::Principal,
            1 => Var::Action,
            2 => Var::Resource,
            _ => Var::Context,
        }),
    };
    if depth == 0 {
        return leaf(c);
    }
    let attr = |c: &mut ByteCursor| -> Option<String> {
        if attrs.is_empty() {
            None
        } else {
            Some(attrs[c.choose(attrs.len())].clone())
        }
    };
    match c.choose(22) {
        0..=2 => leaf(c),
        3 => Expr::not(untyped(c, attrs, uids, depth - 1)),
        4 => Expr::neg(untyped(c, attrs, uids, depth - 1)),
        5 => Expr::and(
            untyped(c, attrs, uids, depth - 1),
            untyped(c, attrs, uids, depth - 1),
        ),
        6 => Expr::or(
            untyped(c, attrs, uids, depth - 1),
            untyped(c, attrs, uids, depth - 1),
        ),
        7 => Expr::ite(
            untyped(c, attrs, uids, depth - 1),
            untyped(c, attrs, uids, depth - 1),
            untyped(c, attrs, uids, depth - 1),
        ),
        k @ 8..=15 => {
            let op = [
                BinOp::Eq,
                BinOp::Neq,
                BinOp::Lt,
                BinOp::Le,
                BinOp::Gt,
                BinOp::Ge,
                BinOp::Add,
                BinOp::Sub,
            ][k - 8];
            Expr::binop(
                op,
                untyped(c, attrs, uids, depth - 1),
                untyped(c, attrs, uids, depth - 1),
            )
        }
        16 => Expr::binop(
            BinOp::In,
            untyped(c, attrs, uids, depth - 1),
            untyped(c, attrs, uids, depth - 1),
        ),
        17 => Expr::binop(
            BinOp::Contains,
            untyped(c, attrs, uids, depth - 1),
            untyped(c, attrs, uids, depth - 1),
        ),
        18 => Expr::like(untyped(c, attrs, uids, depth - 1), pattern_pool(c)),
        19 => match attr(c) {
            Some(name) => Expr::has_attr(untyped(c, attrs, uids, depth - 1), name),
            None => leaf(c),
        },
        20 => match attr(c) {
            Some(name) => Expr::get_attr(untyped(c, attrs, uids, depth - 1), name),
            None => leaf(c),
        },
        _ => {
            if c.flag() {
                let n = c.choose(3);
                Expr::SetLit((0..n).map(|_| untyped(c, attrs, uids, depth - 1)).collect())
            } else {
                let n = c.choose(3);
                let mut fields = Vec::new();
                for _ in 0..n {
                    match attr(c) {
                        Some(name) if !fields.iter().any(|(f, _)| *f == name) => {
                            fields.push((name, untyped(c, attrs, uids, depth - 1)));
                        }
                        _ => {}
                    }
                }
                Expr::RecordLit(fields)
            }
        }
    }
}
