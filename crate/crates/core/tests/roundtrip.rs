use contextflow::macro_lang::{serialize_context, ContextBlock, ContextItem, Directive};
use contextflow::{
    parse_context, parse_workflow, serialize, AttributeValue, ContextDocument, Description, DescriptionPattern,
    SourceRef, Statement,
};
use proptest::prelude::*;

const KEYWORDS: [&str; 5] = ["attach", "framework", "namespace", "contextBlock", "end"];

fn ident() -> impl Strategy<Value = String> {
    "[A-Za-z_][A-Za-z0-9_.]{0,10}".prop_filter("keyword", |s| !KEYWORDS.contains(&s.as_str()))
}

fn token() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_.]{1,10}"
}

fn value() -> impl Strategy<Value = AttributeValue> {
    prop_oneof![
        token().prop_map(AttributeValue::Literal),
        (ident(), token()).prop_map(|(e, a)| AttributeValue::FlowRef {
            source: SourceRef::Element(e),
            attribute: a,
        }),
        token().prop_map(|a| AttributeValue::FlowRef {
            source: SourceRef::Args,
            attribute: a,
        }),
    ]
}

fn pattern() -> impl Strategy<Value = DescriptionPattern> {
    prop::collection::vec((ident(), prop::collection::vec(prop_oneof![token(), Just("*".to_string())], 1..4)), 1..4)
        .prop_map(|pairs| {
            let mut p = DescriptionPattern::default();
            for (k, vs) in pairs {
                for v in vs {
                    p.push(&k, &v);
                }
            }
            p
        })
}

fn directive() -> impl Strategy<Value = Directive> {
    prop_oneof![
        (token(), value()).prop_map(|(key, value)| Directive::Define { key, value }),
        pattern().prop_map(|pattern| Directive::AddDependency { pattern }),
        (token(), token()).prop_map(|(task, handler)| Directive::Oncall { task, handler }),
        (token(), pattern()).prop_map(|(alias, pattern)| Directive::NamespaceAdd { alias, pattern }),
        (token(), value()).prop_map(|(key, value)| Directive::Check { key, value }),
    ]
}

fn top_level() -> impl Strategy<Value = Statement> {
    prop_oneof![
        ident().prop_map(|name| Statement::Attach { name }),
        (token(), prop::collection::vec(token(), 1..4)).prop_map(|(group, tasks)| Statement::FrameworkDefine { group, tasks }),
        (token(), token()).prop_map(|(alias, task)| Statement::FrameworkAlias { alias, task }),
        (token(), pattern()).prop_map(|(alias, pattern)| Statement::NamespaceAdd {
            scope: None,
            alias,
            pattern,
        }),
    ]
}

fn statement() -> impl Strategy<Value = Statement> {
    prop_oneof![
        top_level(),
        Just(Statement::FrameworkRun),
        (ident(), ident()).prop_map(|(element, target)| Statement::AddDep { element, target }),
        (ident(), directive()).prop_map(|(e, d)| d.bind(&e)),
    ]
}

fn document() -> impl Strategy<Value = ContextDocument> {
    let item = prop_oneof![
        top_level().prop_map(ContextItem::Statement),
        (pattern(), prop::collection::vec(directive(), 0..5))
            .prop_map(|(header, body)| ContextItem::Block(ContextBlock { header, body })),
    ];
    prop::collection::vec(item, 0..8).prop_map(|items| ContextDocument {
        id: "Generated.ctx".into(),
        items,
    })
}

proptest! {
    #[test]
    fn workflow_text_round_trips(statements in prop::collection::vec(statement(), 0..20)) {
        let text = serialize(&statements);
        let parsed = parse_workflow(&text).unwrap();
        prop_assert_eq!(&parsed, &statements);
        prop_assert_eq!(serialize(&parsed), text);
    }

    #[test]
    fn spacing_does_not_matter(statements in prop::collection::vec(statement(), 1..10), pad in "[ \t]{1,3}") {
        let text: String = serialize(&statements)
            .lines()
            .map(|l| format!("{pad}{}{pad}\n\n# note\n", l.replace(' ', &format!(" {pad}"))))
            .collect();
        prop_assert_eq!(parse_workflow(&text).unwrap(), statements);
    }

    #[test]
    fn context_text_round_trips(doc in document()) {
        let text = serialize_context(&doc);
        let parsed = parse_context(&text, &doc.id).unwrap();
        prop_assert_eq!(&parsed, &doc);
        prop_assert_eq!(serialize_context(&parsed), text);
    }

    #[test]
    fn description_text_round_trips(pairs in prop::collection::btree_map(ident(), token(), 1..5)) {
        let mut d = Description::default();
        for (k, v) in &pairs {
            d.insert(k, v);
        }
        let parsed: Description = d.to_string().parse().unwrap();
        prop_assert_eq!(&parsed, &d);
        prop_assert!(d.to_pattern().matches(&d));
    }

    #[test]
    fn pattern_text_round_trips(p in pattern()) {
        let parsed: DescriptionPattern = p.to_string().parse().unwrap();
        prop_assert_eq!(parsed, p);
    }
}
