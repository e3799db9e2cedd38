use crate::tabular::{Cell, Observation};

/// A predefined passenger the user can play.
#[derive(Debug, Clone, PartialEq)]
pub struct Persona {
    pub id: String,
    pub name: String,
    pub slots: Observation<f64>,
}

impl Persona {
    /// Jack and Rose.
    pub fn bundled() -> Vec<Persona> {
        let obs = |gender: &str, class: &str, age: f64, fare: f64, sibsp: f64, parch: f64, embarked: &str| {
            Observation::new()
                .with("gender", Cell::Level(gender.into()))
                .with("class", Cell::Level(class.into()))
                .with("age", Cell::Number(age))
                .with("fare", Cell::Number(fare))
                .with("sibsp", Cell::Number(sibsp))
                .with("parch", Cell::Number(parch))
                .with("embarked", Cell::Level(embarked.into()))
        };
        vec![
            Persona {
                id: "jack".into(),
                name: "Jack".into(),
                slots: obs("male", "3", 20.0, 7.9, 0.0, 0.0, "S"),
            },
            Persona {
                id: "rose".into(),
                name: "Rose".into(),
                slots: obs("female", "1", 17.0, 80.0, 0.0, 1.0, "S"),
            },
        ]
    }
}
