//! Codenames rules engine.
//!
//! Supports the two-team competitive game and the single-team solitaire
//! variant. Solitaire reuses the competitive board: the playing team is always
//! [`Team::First`] and the second team never takes a turn, so revealing all of
//! its cards is a loss.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome::{Adverse, TurnOutcome};

pub const BOARD_SIZE: usize = 25;
pub const FIRST_TEAM_CARDS: usize = 9;
pub const SECOND_TEAM_CARDS: usize = 8;
pub const BYSTANDER_CARDS: usize = 7;
pub const ASSASSIN_CARDS: usize = 1;
pub const MAX_CLUE_NUMBER: u8 = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Team {
    First,
    Second,
}

impl Team {
    pub fn other(self) -> Team {
        match self {
            Team::First => Team::Second,
            Team::Second => Team::First,
        }
    }

    pub fn category(self) -> CardCategory {
        match self {
            Team::First => CardCategory::TeamFirst,
            Team::Second => CardCategory::TeamSecond,
        }
    }

    pub fn card_count(self) -> usize {
        match self {
            Team::First => FIRST_TEAM_CARDS,
            Team::Second => SECOND_TEAM_CARDS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CardCategory {
    TeamFirst,
    TeamSecond,
    Bystander,
    Assassin,
}

impl CardCategory {
    pub const ALL: [CardCategory; 4] = [
        CardCategory::TeamFirst,
        CardCategory::TeamSecond,
        CardCategory::Bystander,
        CardCategory::Assassin,
    ];

    /// Cards of this category on a fresh board.
    pub fn board_count(self) -> usize {
        match self {
            CardCategory::TeamFirst => FIRST_TEAM_CARDS,
            CardCategory::TeamSecond => SECOND_TEAM_CARDS,
            CardCategory::Bystander => BYSTANDER_CARDS,
            CardCategory::Assassin => ASSASSIN_CARDS,
        }
    }

    /// How a reveal of this card reads from `team`'s perspective.
    fn adverse_for(self, team: Team) -> Option<Adverse> {
        match self {
            CardCategory::Bystander => Some(Adverse::Bystander),
            CardCategory::Assassin => Some(Adverse::Assassin),
            c if c == team.category() => None,
            _ => Some(Adverse::Opponent),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Competitive,
    Solitaire,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GameStatus {
    Ongoing,
    Won(Team),
    Lost(Team),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Card {
    pub word: String,
    pub category: CardCategory,
    pub revealed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clue {
    pub word: String,
    pub number: u8,
}

impl Clue {
    pub fn new(word: impl Into<String>, number: u8) -> Self {
        Clue {
            word: word.into(),
            number,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Guess {
    pub word: String,
    pub category: CardCategory,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TurnRecord {
    pub team: Team,
    pub clue: Clue,
    pub guesses: Vec<Guess>,
    pub outcome: TurnOutcome,
}

/// What a guesser does when asked for its next guess.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GuessDecision {
    Guess(String),
    Stop,
}

fn same_word(a: &str, b: &str) -> bool {
    a == b || a.to_lowercase() == b.to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    board: Vec<Card>,
    active_team: Team,
    mode: Mode,
    turn_log: Vec<TurnRecord>,
    status: GameStatus,
}

impl GameState {
    /// Deal a board: 25 distinct words and a random 9/8/7/1 category split.
    pub fn new_board(words: &[impl AsRef<str>], seed: u64, mode: Mode) -> Result<Self> {
        let mut seen = HashSet::new();
        let distinct: Vec<&str> = words
            .iter()
            .map(AsRef::as_ref)
            .filter(|w| seen.insert(w.to_lowercase()))
            .collect();
        if distinct.len() < BOARD_SIZE {
            return Err(Error::InvalidInput(format!(
                "need at least {BOARD_SIZE} distinct words, got {}",
                distinct.len()
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let chosen: Vec<&str> = distinct
            .choose_multiple(&mut rng, BOARD_SIZE)
            .copied()
            .collect();
        let mut categories: Vec<CardCategory> = CardCategory::ALL
            .iter()
            .flat_map(|&c| std::iter::repeat_n(c, c.board_count()))
            .collect();
        categories.shuffle(&mut rng);
        let layout = chosen
            .into_iter()
            .map(str::to_string)
            .zip(categories)
            .collect();
        Self::from_layout(layout, mode)
    }

    /// Start a game from an explicit board layout.
    pub fn from_layout(layout: Vec<(String, CardCategory)>, mode: Mode) -> Result<Self> {
        if layout.len() != BOARD_SIZE {
            return Err(Error::InvalidInput(format!(
                "board must have {BOARD_SIZE} cards, got {}",
                layout.len()
            )));
        }
        let mut seen = HashSet::new();
        if !layout.iter().all(|(w, _)| seen.insert(w.to_lowercase())) {
            return Err(Error::InvalidInput("board words must be distinct".into()));
        }
        for c in CardCategory::ALL {
            let n = layout.iter().filter(|(_, k)| *k == c).count();
            if n != c.board_count() {
                return Err(Error::InvalidInput(format!(
                    "board has {n} {c:?} cards, expected {}",
                    c.board_count()
                )));
            }
        }
        Ok(GameState {
            board: layout
                .into_iter()
                .map(|(word, category)| Card {
                    word,
                    category,
                    revealed: false,
                })
                .collect(),
            active_team: Team::First,
            mode,
            turn_log: Vec::new(),
            status: GameStatus::Ongoing,
        })
    }

    pub fn board(&self) -> &[Card] {
        &self.board
    }

    pub fn layout(&self) -> Vec<(String, CardCategory)> {
        self.board
            .iter()
            .map(|c| (c.word.clone(), c.category))
            .collect()
    }

    pub fn active_team(&self) -> Team {
        self.active_team
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn status(&self) -> GameStatus {
        self.status
    }

    pub fn is_over(&self) -> bool {
        self.status != GameStatus::Ongoing
    }

    pub fn turn_log(&self) -> &[TurnRecord] {
        &self.turn_log
    }

    pub fn turns_played(&self) -> usize {
        self.turn_log.len()
    }

    pub fn unrevealed_words(&self) -> Vec<String> {
        self.board
            .iter()
            .filter(|c| !c.revealed)
            .map(|c| c.word.clone())
            .collect()
    }

    pub fn remaining(&self, category: CardCategory) -> usize {
        self.board
            .iter()
            .filter(|c| c.category == category && !c.revealed)
            .count()
    }

    pub fn revealed(&self, category: CardCategory) -> usize {
        category.board_count() - self.remaining(category)
    }

    fn find(&self, word: &str) -> Option<usize> {
        self.board.iter().position(|c| same_word(&c.word, word))
    }

    /// A clue is legal when its word is not an unguessed board word and its
    /// number does not exceed the active team's unrevealed cards.
    pub fn legal_clue(&self, clue: &Clue) -> bool {
        let clashes = self
            .board
            .iter()
            .any(|c| !c.revealed && same_word(&c.word, &clue.word));
        !clashes
            && !clue.word.trim().is_empty()
            && clue.number as usize <= self.remaining(self.active_team.category())
    }

    /// Reveal one card. Returns its category and whether the turn ends
    /// because the card does not belong to the active team.
    pub fn apply_guess(&mut self, word: &str) -> Result<(CardCategory, bool)> {
        if self.is_over() {
            return Err(Error::InvalidInput("game is already over".into()));
        }
        let idx = self
            .find(word)
            .ok_or_else(|| Error::InvalidInput(format!("{word:?} is not a board word")))?;
        if self.board[idx].revealed {
            return Err(Error::InvalidInput(format!("{word:?} is already revealed")));
        }
        self.board[idx].revealed = true;
        let category = self.board[idx].category;
        let team = self.active_team;

        self.status = match category {
            CardCategory::Assassin => GameStatus::Lost(team),
            c if c == team.category() && self.remaining(c) == 0 => GameStatus::Won(team),
            c if c == team.other().category() && self.remaining(c) == 0 => match self.mode {
                Mode::Competitive => GameStatus::Won(team.other()),
                Mode::Solitaire => GameStatus::Lost(team),
            },
            _ => GameStatus::Ongoing,
        };
        Ok((category, category != team.category()))
    }

    /// Play one full turn: a clue followed by guesses until a non-team card,
    /// a voluntary stop, `n + 1` correct guesses, or the end of the game. A
    /// clue number of zero lifts the cap on correct guesses.
    ///
    /// On error the state is left untouched.
    pub fn resolve_turn(
        &mut self,
        clue: &Clue,
        mut guesser: impl FnMut(&GameState) -> GuessDecision,
    ) -> Result<TurnOutcome> {
        if self.is_over() {
            return Err(Error::InvalidInput("game is already over".into()));
        }
        if !self.legal_clue(clue) {
            return Err(Error::InvalidInput(format!("illegal clue {clue:?}")));
        }
        let mut next = self.clone();
        let team = next.active_team;
        let cap = (clue.number > 0).then(|| clue.number as usize + 1);
        let mut flips = 0u8;
        let mut adverse = None;
        let mut guesses = Vec::new();

        loop {
            if cap.is_some_and(|cap| guesses.len() >= cap) {
                break;
            }
            let word = match guesser(&next) {
                GuessDecision::Guess(w) => w,
                GuessDecision::Stop if guesses.is_empty() => {
                    return Err(Error::InvalidInput(
                        "at least one guess is required per turn".into(),
                    ))
                }
                GuessDecision::Stop => break,
            };
            let (category, ended) = next.apply_guess(&word)?;
            let idx = next.find(&word).expect("guessed word is on the board");
            guesses.push(Guess {
                word: next.board[idx].word.clone(),
                category,
            });
            match category.adverse_for(team) {
                None => flips += 1,
                a => adverse = a,
            }
            if ended || next.is_over() {
                break;
            }
        }

        let outcome = TurnOutcome::new(flips, adverse)?;
        next.turn_log.push(TurnRecord {
            team,
            clue: clue.clone(),
            guesses,
            outcome,
        });
        if next.mode == Mode::Competitive && !next.is_over() {
            next.active_team = team.other();
        }
        *self = next;
        Ok(outcome)
    }

    /// Rebuild a game from its starting layout and turn log. Fails if a
    /// logged guess is rejected or a logged outcome does not reproduce.
    pub fn replay(
        layout: Vec<(String, CardCategory)>,
        mode: Mode,
        log: &[TurnRecord],
    ) -> Result<GameState> {
        let mut state = GameState::from_layout(layout, mode)?;
        for (turn, rec) in log.iter().enumerate() {
            if state.active_team != rec.team {
                return Err(Error::InvalidInput(format!(
                    "turn {turn}: logged team {:?} but {:?} is active",
                    rec.team, state.active_team
                )));
            }
            let mut pending = rec.guesses.iter();
            let outcome = state.resolve_turn(&rec.clue, |_| match pending.next() {
                Some(g) => GuessDecision::Guess(g.word.clone()),
                None => GuessDecision::Stop,
            })?;
            let last = state.turn_log.last().expect("turn recorded");
            if outcome != rec.outcome || last.guesses != rec.guesses {
                return Err(Error::InvalidInput(format!(
                    "turn {turn}: replay diverged from log"
                )));
            }
        }
        Ok(state)
    }

    /// One export record per logged turn.
    pub fn export_log(&self, game_id: u64) -> Vec<TurnLogRecord> {
        self.turn_log
            .iter()
            .enumerate()
            .map(|(i, t)| TurnLogRecord::from_turn(game_id, i, t))
            .collect()
    }
}

/// Line-delimited game log entry, one per turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnLogRecord {
    pub game_id: u64,
    pub turn_index: usize,
    pub team: Team,
    pub clue_word: String,
    pub clue_number: u8,
    pub guesses: Vec<Guess>,
    pub outcome_code: String,
}

impl TurnLogRecord {
    pub fn from_turn(game_id: u64, turn_index: usize, t: &TurnRecord) -> Self {
        TurnLogRecord {
            game_id,
            turn_index,
            team: t.team,
            clue_word: t.clue.word.clone(),
            clue_number: t.clue.number,
            guesses: t.guesses.clone(),
            outcome_code: t.outcome.label(),
        }
    }

    pub fn outcome(&self) -> Result<TurnOutcome> {
        self.outcome_code.parse()
    }

    /// Back to the engine's record, for replay.
    pub fn to_turn(&self) -> Result<TurnRecord> {
        Ok(TurnRecord {
            team: self.team,
            clue: Clue::new(self.clue_word.clone(), self.clue_number),
            guesses: self.guesses.clone(),
            outcome: self.outcome()?,
        })
    }
}

pub fn write_log_records<'a>(
    mut w: impl Write,
    records: impl IntoIterator<Item = &'a TurnLogRecord>,
) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")
            .map_err(|e| Error::io("<log writer>", e))?;
    }
    Ok(())
}

pub fn read_log_records(r: impl BufRead, source: &str) -> Result<Vec<TurnLogRecord>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: TurnLogRecord = serde_json::from_str(&line)
            .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        rec.outcome()
            .map_err(|e| Error::parse(source, i + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}
