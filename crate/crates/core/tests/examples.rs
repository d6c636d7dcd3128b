// Every example program runs to completion.

mod insurance_commitments {
    include!("../examples/insurance_commitments.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod meta_actions {
    include!("../examples/meta_actions.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod monitor_automata {
    include!("../examples/monitor_automata.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod oracle_enumeration {
    include!("../examples/oracle_enumeration.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod payment_monitoring {
    include!("../examples/payment_monitoring.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod regulation_language {
    include!("../examples/regulation_language.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod safety_analysis {
    include!("../examples/safety_analysis.rs");

    #[test]
    fn runs() {
        main();
    }
}

mod train_compliance {
    include!("../examples/train_compliance.rs");

    #[test]
    fn runs() {
        main();
    }
}
