#include "coordcheck/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace coord {

ExprPtr make_bool(bool v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::BoolLit;
  e->bool_value = v;
  return e;
}
ExprPtr make_int(int64_t v) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::IntLit;
  e->int_value = v;
  return e;
}
ExprPtr make_local(std::string name) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Local;
  e->local = std::move(name);
  return e;
}
ExprPtr make_not(ExprPtr inner) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Not;
  e->lhs = std::move(inner);
  return e;
}
ExprPtr make_bin(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_shared<Expr>();
  e->kind = Expr::Kind::Bin;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

const LocalDecl* ProcessDef::find_local(const std::string& name) const {
  for (const auto& l : locals) {
    if (l.name == name) return &l;
  }
  return nullptr;
}

int ProcessDef::step_index(const std::string& label) const {
  for (size_t i = 0; i < body.size(); ++i) {
    if (body[i].label == label) return static_cast<int>(i);
  }
  return -1;
}

const ProcessDef* ProtocolProgram::find_process(const std::string& agent) const {
  for (const auto& p : processes) {
    if (p.agent == agent) return &p;
  }
  return nullptr;
}

// --- Lexer -------------------------------------------------------------

namespace {

enum class Tok { Ident, Int, String, Punct, Newline, Eof };

struct Token {
  Tok type = Tok::Eof;
  std::string text;
  int64_t value = 0;
  int line = 1;
  int col = 1;
};

const std::set<std::string> kKeywords = {
    "process", "fair",  "local",       "send",   "receive", "receive_any",
    "acquire", "release", "ctr_acquire", "ctr_release", "if", "else",
    "end",     "while", "either",      "or",     "goto",    "skip",
    "and",     "not",   "true",        "false",  "int",     "bool"};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        continue;
      }
      if (c == '\n') {
        // Collapse blank lines; a Newline token only after real content.
        if (!out.empty() && out.back().type != Tok::Newline) {
          out.push_back({Tok::Newline, "\\n", 0, line_, col_});
        }
        ++pos_;
        ++line_;
        col_ = 1;
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(lex_ident());
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(lex_int(false));
        continue;
      }
      if (c == '"') {
        out.push_back(lex_string());
        continue;
      }
      out.push_back(lex_punct());
    }
    if (!out.empty() && out.back().type != Tok::Newline) {
      out.push_back({Tok::Newline, "\\n", 0, line_, col_});
    }
    out.push_back({Tok::Eof, "<eof>", 0, line_, col_});
    return out;
  }

 private:
  void advance() {
    ++pos_;
    ++col_;
  }

  Token lex_ident() {
    Token t{Tok::Ident, "", 0, line_, col_};
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      t.text += text_[pos_];
      advance();
    }
    return t;
  }

  Token lex_int(bool negative) {
    Token t{Tok::Int, "", 0, line_, col_};
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      t.text += text_[pos_];
      advance();
    }
    t.value = std::stoll(t.text);
    if (negative) {
      t.value = -t.value;
      t.text = "-" + t.text;
    }
    return t;
  }

  Token lex_string() {
    Token t{Tok::String, "", 0, line_, col_};
    advance();  // opening quote
    while (pos_ < text_.size() && text_[pos_] != '"' && text_[pos_] != '\n') {
      t.text += text_[pos_];
      advance();
    }
    if (pos_ >= text_.size() || text_[pos_] != '"') {
      throw ProtocolParseError(t.line, t.col, "unterminated string literal");
    }
    advance();  // closing quote
    return t;
  }

  Token lex_punct() {
    Token t{Tok::Punct, "", 0, line_, col_};
    char c = text_[pos_];
    char n = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    auto two = [&](const char* s) {
      t.text = s;
      advance();
      advance();
    };
    auto one = [&]() {
      t.text = std::string(1, c);
      advance();
    };
    switch (c) {
      case '=':
        if (n == '=') two("=="); else one();
        break;
      case '!':
        if (n == '=') { two("!="); break; }
        throw ProtocolParseError(line_, col_, "unexpected character '!'");
      case '<':
        if (n == '=') two("<="); else one();
        break;
      case '>':
        if (n == '=') two(">="); else one();
        break;
      case '-':
        if (n == '>') two("->"); else one();
        break;
      case '.':
        if (n == '.') { two(".."); break; }
        throw ProtocolParseError(line_, col_, "unexpected character '.'");
      case ':': case '+': case '{': case '}': case '(': case ')': case ',': case '[': case ']':
        one();
        break;
      default:
        throw ProtocolParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }
    return t;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// --- Parser ------------------------------------------------------------

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  ProtocolProgram parse() {
    ProtocolProgram program;
    skip_newlines();
    while (!at(Tok::Eof)) {
      program.processes.push_back(parse_process());
      skip_newlines();
    }
    if (program.processes.empty()) {
      throw ProtocolParseError(1, 1, "expected at least one process");
    }
    std::set<std::string> agents;
    for (const auto& p : program.processes) {
      if (!agents.insert(p.agent).second) {
        throw ProtocolParseError(1, 1, "duplicate process for agent '" + p.agent + "'");
      }
    }
    return program;
  }

 private:
  const Token& peek(size_t ahead = 0) const {
    size_t i = std::min(pos_ + ahead, toks_.size() - 1);
    return toks_[i];
  }
  const Token& next() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
  bool at(Tok t) const { return peek().type == t; }
  bool at_ident(const char* kw) const { return at(Tok::Ident) && peek().text == kw; }
  bool at_punct(const char* p) const { return at(Tok::Punct) && peek().text == p; }

  [[noreturn]] void error(const std::string& msg) const {
    const Token& t = peek();
    throw ProtocolParseError(t.line, t.col, msg + " (got '" + t.text + "')");
  }

  void expect_punct(const char* p) {
    if (!at_punct(p)) error(std::string("expected '") + p + "'");
    next();
  }
  void expect_newline() {
    if (!at(Tok::Newline)) error("expected end of line");
    next();
  }
  std::string expect_name(const char* what) {
    if (!at(Tok::Ident)) error(std::string("expected ") + what);
    if (kKeywords.count(peek().text)) {
      error(std::string("expected ") + what + ", not a keyword");
    }
    return next().text;
  }
  void skip_newlines() {
    while (at(Tok::Newline)) next();
  }

  ProcessDef parse_process() {
    ProcessDef proc;
    if (at_ident("fair")) {
      proc.fair = true;
      next();
    }
    if (!at_ident("process")) error("expected 'process'");
    next();
    proc.agent = expect_name("agent name");
    expect_newline();
    skip_newlines();

    while (at_ident("local")) {
      proc.locals.push_back(parse_local(proc));
      skip_newlines();
    }

    while (at(Tok::Ident) && !at_ident("process") && !at_ident("fair")) {
      proc.body.push_back(parse_step(proc));
      skip_newlines();
    }
    if (proc.body.empty()) {
      throw ProtocolParseError(peek().line, peek().col,
                               "process '" + proc.agent + "' has no labeled steps");
    }
    resolve_gotos(proc);
    return proc;
  }

  LocalDecl parse_local(const ProcessDef& proc) {
    LocalDecl decl;
    decl.line = peek().line;
    next();  // local
    decl.name = expect_name("local name");
    if (proc.find_local(decl.name) != nullptr) {
      throw ProtocolParseError(decl.line, 1, "duplicate local '" + decl.name + "'");
    }
    expect_punct(":");
    if (at_ident("bool")) {
      next();
      decl.is_bool = true;
      decl.lo = 0;
      decl.hi = 1;
    } else if (at_ident("int")) {
      next();
      expect_punct("[");
      decl.lo = expect_int("lower bound");
      expect_punct("..");
      decl.hi = expect_int("upper bound");
      expect_punct("]");
      if (decl.lo > decl.hi) {
        throw ProtocolParseError(decl.line, 1, "empty interval for local '" + decl.name + "'");
      }
    } else {
      error("expected 'bool' or 'int[lo..hi]'");
    }
    expect_punct("=");
    if (decl.is_bool) {
      if (at_ident("true")) {
        next();
        decl.init = 1;
      } else if (at_ident("false")) {
        next();
        decl.init = 0;
      } else {
        error("expected 'true' or 'false'");
      }
    } else {
      decl.init = expect_int("initial value");
      if (decl.init < decl.lo || decl.init > decl.hi) {
        throw ProtocolParseError(decl.line, 1,
                                 "initial value of '" + decl.name + "' outside its domain");
      }
    }
    expect_newline();
    return decl;
  }

  int64_t expect_int(const char* what) {
    bool neg = false;
    if (at_punct("-")) {
      neg = true;
      next();
    }
    if (!at(Tok::Int)) error(std::string("expected ") + what);
    int64_t v = next().value;
    return neg ? -v : v;
  }

  LabeledStep parse_step(ProcessDef& proc) {
    LabeledStep step;
    step.line = peek().line;
    step.label = expect_name("label");
    if (step.label == kDoneLabel) {
      throw ProtocolParseError(step.line, 1, "'Done' is reserved and cannot be declared");
    }
    if (proc.step_index(step.label) >= 0) {
      throw ProtocolParseError(step.line, 1, "duplicate label '" + step.label + "'");
    }
    expect_punct(":");
    expect_newline();
    skip_newlines();
    step.statements = parse_statement_list(proc, /*inside_while=*/false, StopAt::Label);
    if (step.statements.empty()) {
      throw ProtocolParseError(step.line, 1, "label '" + step.label + "' has no statements");
    }
    bool has_either = false;
    for (const auto& s : step.statements) {
      if (std::holds_alternative<EitherStmt>(s.node)) has_either = true;
    }
    if (has_either && step.statements.size() != 1) {
      throw ProtocolParseError(step.line, 1,
                               "an either/or must be the sole statement of its step");
    }
    return step;
  }

  enum class StopAt { Label, BlockEnd };

  // A label line is IDENT ':' NEWLINE; a statement line never starts that way.
  bool at_label_line() const {
    return at(Tok::Ident) && !kKeywords.count(peek().text) && peek(1).type == Tok::Punct &&
           peek(1).text == ":";
  }

  std::vector<Statement> parse_statement_list(ProcessDef& proc, bool inside_while, StopAt stop) {
    std::vector<Statement> list;
    bool saw_goto = false;
    for (;;) {
      skip_newlines();
      if (stop == StopAt::BlockEnd) {
        if (at_ident("end") || at_ident("else") || at_ident("or")) break;
        if (at(Tok::Eof)) error("unterminated block, expected 'end'");
      } else {
        if (at(Tok::Eof) || at_ident("process") || at_ident("fair") || at_label_line()) break;
      }
      if (saw_goto) {
        error("unreachable statement after 'goto'");
      }
      Statement s = parse_statement(proc, inside_while);
      saw_goto = std::holds_alternative<GotoStmt>(s.node);
      list.push_back(std::move(s));
    }
    return list;
  }

  Statement parse_statement(ProcessDef& proc, bool inside_while) {
    Statement s;
    s.line = peek().line;
    if (at_ident("send")) {
      next();
      SendStmt st;
      st.channel = expect_name("channel");
      if (!at(Tok::String)) error("expected message label string");
      st.label = next().text;
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("receive")) {
      if (inside_while) error("'receive' may not appear inside 'while' (use a label and goto)");
      next();
      ReceiveStmt st;
      st.channel = expect_name("channel");
      st.expected = parse_label_set();
      st.bind = parse_optional_bind(proc, s.line);
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("receive_any")) {
      if (inside_while) error("'receive_any' may not appear inside 'while'");
      next();
      s.node = parse_receive_any(proc, s.line);
      expect_newline();
    } else if (at_ident("acquire")) {
      if (inside_while) error("'acquire' may not appear inside 'while' (use a label and goto)");
      next();
      AcquireStmt st;
      st.resource = expect_name("resource");
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("release")) {
      next();
      ReleaseStmt st;
      st.resource = expect_name("resource");
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("ctr_acquire")) {
      if (inside_while) error("'ctr_acquire' may not appear inside 'while'");
      next();
      CounterAcquireStmt st;
      st.resource = expect_name("resource");
      st.amount = parse_optional_amount(s.line);
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("ctr_release")) {
      next();
      CounterReleaseStmt st;
      st.resource = expect_name("resource");
      st.amount = parse_optional_amount(s.line);
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("goto")) {
      next();
      GotoStmt st;
      if (at(Tok::Ident) && peek().text == kDoneLabel) {
        st.target = next().text;
      } else {
        st.target = expect_name("label");
      }
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("skip")) {
      next();
      expect_newline();
      s.node = SkipStmt{};
    } else if (at_ident("if")) {
      next();
      IfStmt st;
      st.cond = parse_expr(proc, ExprType::Bool);
      expect_newline();
      st.then_body = parse_statement_list(proc, inside_while, StopAt::BlockEnd);
      if (st.then_body.empty()) error("'if' body is empty");
      if (at_ident("else")) {
        next();
        expect_newline();
        st.else_body = parse_statement_list(proc, inside_while, StopAt::BlockEnd);
        if (st.else_body.empty()) error("'else' body is empty");
      }
      if (at_ident("or")) error("'or' outside either");
      if (!at_ident("end")) error("expected 'end'");
      next();
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("while")) {
      next();
      WhileStmt st;
      st.cond = parse_expr(proc, ExprType::Bool);
      expect_newline();
      st.body = parse_statement_list(proc, /*inside_while=*/true, StopAt::BlockEnd);
      if (st.body.empty()) error("'while' body is empty");
      if (!at_ident("end")) error("expected 'end'");
      next();
      expect_newline();
      s.node = std::move(st);
    } else if (at_ident("either")) {
      if (inside_while) error("'either' may not appear inside 'while'");
      next();
      expect_newline();
      EitherStmt st;
      st.branches.push_back(parse_statement_list(proc, false, StopAt::BlockEnd));
      while (at_ident("or")) {
        next();
        expect_newline();
        st.branches.push_back(parse_statement_list(proc, false, StopAt::BlockEnd));
      }
      if (!at_ident("end")) error("expected 'end'");
      next();
      expect_newline();
      if (st.branches.size() < 2) error("either needs at least two branches");
      for (const auto& b : st.branches) {
        if (b.empty()) error("empty either branch");
      }
      for (const auto& b : st.branches) {
        for (const auto& inner : b) {
          if (std::holds_alternative<EitherStmt>(inner.node)) {
            throw ProtocolParseError(inner.line, 1, "nested either/or is not allowed");
          }
        }
      }
      s.node = std::move(st);
    } else if (at(Tok::Ident) && !kKeywords.count(peek().text) && peek(1).type == Tok::Punct &&
               peek(1).text == "=") {
      AssignStmt st;
      st.local = next().text;
      const LocalDecl* decl = proc.find_local(st.local);
      if (decl == nullptr) {
        throw ProtocolParseError(s.line, 1, "assignment to undeclared local '" + st.local + "'");
      }
      next();  // '='
      st.value = parse_expr(proc, decl->is_bool ? ExprType::Bool : ExprType::Int);
      expect_newline();
      s.node = std::move(st);
    } else {
      error("expected a statement");
    }
    return s;
  }

  std::vector<std::string> parse_label_set() {
    std::vector<std::string> labels;
    expect_punct("{");
    for (;;) {
      if (!at(Tok::String)) error("expected message label string");
      labels.push_back(next().text);
      if (at_punct(",")) {
        next();
        continue;
      }
      break;
    }
    expect_punct("}");
    return labels;
  }

  std::optional<std::string> parse_optional_bind(const ProcessDef& proc, int line) {
    if (!at_punct("->")) return std::nullopt;
    next();
    std::string name = expect_name("local");
    const LocalDecl* decl = proc.find_local(name);
    if (decl == nullptr) {
      throw ProtocolParseError(line, 1, "bind target '" + name + "' is not a declared local");
    }
    if (decl->is_bool) {
      throw ProtocolParseError(line, 1, "bind target '" + name + "' must be an int local");
    }
    return name;
  }

  int64_t parse_optional_amount(int line) {
    if (!at(Tok::Int)) return 1;
    int64_t v = next().value;
    if (v < 1) throw ProtocolParseError(line, 1, "amount must be >= 1");
    return v;
  }

  // receive_any arms desugar to an either/or over single-channel receives.
  std::variant<SendStmt, ReceiveStmt, AcquireStmt, ReleaseStmt, CounterAcquireStmt,
               CounterReleaseStmt, AssignStmt, IfStmt, WhileStmt, EitherStmt, GotoStmt, SkipStmt>
  parse_receive_any(const ProcessDef& proc, int line) {
    std::vector<ReceiveStmt> arms;
    for (;;) {
      ReceiveStmt arm;
      arm.channel = expect_name("channel");
      arm.expected = parse_label_set();
      arms.push_back(std::move(arm));
      if (at_punct(",")) {
        next();
        continue;
      }
      break;
    }
    auto bind = parse_optional_bind(proc, line);
    for (auto& arm : arms) arm.bind = bind;
    if (arms.size() == 1) {
      return std::move(arms[0]);
    }
    EitherStmt either;
    for (auto& arm : arms) {
      Statement s;
      s.line = line;
      s.node = std::move(arm);
      either.branches.push_back({std::move(s)});
    }
    return either;
  }

  // --- Expressions, with local type checking --------------------------

  enum class ExprType { Bool, Int };

  ExprPtr parse_expr(const ProcessDef& proc, ExprType want) {
    ExprType got;
    ExprPtr e = parse_or(proc, got);
    if (got != want) {
      error(want == ExprType::Bool ? "expected a boolean expression"
                                   : "expected an integer expression");
    }
    return e;
  }

  ExprPtr parse_or(const ProcessDef& proc, ExprType& type) {
    ExprPtr lhs = parse_and(proc, type);
    while (at_ident("or")) {
      next();
      if (type != ExprType::Bool) error("'or' needs boolean operands");
      ExprType rt;
      ExprPtr rhs = parse_and(proc, rt);
      if (rt != ExprType::Bool) error("'or' needs boolean operands");
      lhs = make_bin(BinOp::Or, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_and(const ProcessDef& proc, ExprType& type) {
    ExprPtr lhs = parse_not(proc, type);
    while (at_ident("and")) {
      next();
      if (type != ExprType::Bool) error("'and' needs boolean operands");
      ExprType rt;
      ExprPtr rhs = parse_not(proc, rt);
      if (rt != ExprType::Bool) error("'and' needs boolean operands");
      lhs = make_bin(BinOp::And, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_not(const ProcessDef& proc, ExprType& type) {
    if (at_ident("not")) {
      next();
      ExprType it;
      ExprPtr inner = parse_not(proc, it);
      if (it != ExprType::Bool) error("'not' needs a boolean operand");
      type = ExprType::Bool;
      return make_not(std::move(inner));
    }
    return parse_cmp(proc, type);
  }

  ExprPtr parse_cmp(const ProcessDef& proc, ExprType& type) {
    ExprPtr lhs = parse_add(proc, type);
    static const std::pair<const char*, BinOp> ops[] = {
        {"==", BinOp::Eq}, {"!=", BinOp::Ne}, {"<=", BinOp::Le},
        {">=", BinOp::Ge}, {"<", BinOp::Lt},  {">", BinOp::Gt}};
    for (const auto& [sym, op] : ops) {
      if (at_punct(sym)) {
        next();
        ExprType rt;
        ExprPtr rhs = parse_add(proc, rt);
        if (op == BinOp::Eq || op == BinOp::Ne) {
          if (rt != type) error("comparison operands must have the same type");
        } else {
          if (type != ExprType::Int || rt != ExprType::Int) {
            error("ordering comparison needs integer operands");
          }
        }
        type = ExprType::Bool;
        return make_bin(op, std::move(lhs), std::move(rhs));
      }
    }
    return lhs;
  }

  ExprPtr parse_add(const ProcessDef& proc, ExprType& type) {
    ExprPtr lhs = parse_primary(proc, type);
    while (at_punct("+") || at_punct("-")) {
      BinOp op = peek().text == "+" ? BinOp::Add : BinOp::Sub;
      next();
      if (type != ExprType::Int) error("arithmetic needs integer operands");
      ExprType rt;
      ExprPtr rhs = parse_primary(proc, rt);
      if (rt != ExprType::Int) error("arithmetic needs integer operands");
      lhs = make_bin(op, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  ExprPtr parse_primary(const ProcessDef& proc, ExprType& type) {
    if (at_punct("(")) {
      next();
      ExprPtr e = parse_or(proc, type);
      expect_punct(")");
      return e;
    }
    if (at_punct("-")) {
      next();
      if (!at(Tok::Int)) error("expected an integer literal");
      type = ExprType::Int;
      return make_int(-next().value);
    }
    if (at(Tok::Int)) {
      type = ExprType::Int;
      return make_int(next().value);
    }
    if (at_ident("true")) {
      next();
      type = ExprType::Bool;
      return make_bool(true);
    }
    if (at_ident("false")) {
      next();
      type = ExprType::Bool;
      return make_bool(false);
    }
    if (at(Tok::Ident) && !kKeywords.count(peek().text)) {
      const Token& t = peek();
      const LocalDecl* decl = proc.find_local(t.text);
      if (decl == nullptr) {
        throw ProtocolParseError(t.line, t.col, "unknown local '" + t.text + "'");
      }
      type = decl->is_bool ? ExprType::Bool : ExprType::Int;
      return make_local(next().text);
    }
    error("expected an expression");
  }

  void resolve_gotos(const ProcessDef& proc) {
    auto walk = [&](const auto& self, const std::vector<Statement>& stmts) -> void {
      for (const auto& s : stmts) {
        if (const auto* g = std::get_if<GotoStmt>(&s.node)) {
          if (g->target != kDoneLabel && proc.step_index(g->target) < 0) {
            throw ProtocolParseError(s.line, 1, "goto target '" + g->target +
                                                    "' is not a label of process '" +
                                                    proc.agent + "'");
          }
        } else if (const auto* i = std::get_if<IfStmt>(&s.node)) {
          self(self, i->then_body);
          self(self, i->else_body);
        } else if (const auto* w = std::get_if<WhileStmt>(&s.node)) {
          self(self, w->body);
        } else if (const auto* e = std::get_if<EitherStmt>(&s.node)) {
          for (const auto& b : e->branches) self(self, b);
        }
      }
    };
    for (const auto& step : proc.body) walk(walk, step.statements);
  }

  std::vector<Token> toks_;
  size_t pos_ = 0;
};

}  // namespace

ProtocolProgram parse_protocol(const std::string& text) {
  Lexer lexer(text);
  Parser parser(lexer.run());
  return parser.parse();
}

// --- Printer -----------------------------------------------------------

namespace {

void print_expr(std::ostream& os, const Expr& e, int parent_prec);

int prec_of(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq: case BinOp::Ne: case BinOp::Lt:
    case BinOp::Le: case BinOp::Gt: case BinOp::Ge: return 4;
    case BinOp::Add: case BinOp::Sub: return 5;
  }
  return 0;
}

const char* op_text(BinOp op) {
  switch (op) {
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
  }
  return "?";
}

void print_expr(std::ostream& os, const Expr& e, int parent_prec) {
  switch (e.kind) {
    case Expr::Kind::BoolLit:
      os << (e.bool_value ? "true" : "false");
      return;
    case Expr::Kind::IntLit:
      os << e.int_value;
      return;
    case Expr::Kind::Local:
      os << e.local;
      return;
    case Expr::Kind::Not:
      os << "not ";
      print_expr(os, *e.lhs, 3);
      return;
    case Expr::Kind::Bin: {
      int p = prec_of(e.op);
      bool parens = p < parent_prec;
      if (parens) os << "(";
      print_expr(os, *e.lhs, p);
      os << " " << op_text(e.op) << " ";
      print_expr(os, *e.rhs, p + 1);
      if (parens) os << ")";
      return;
    }
  }
}

void print_label_set(std::ostream& os, const std::vector<std::string>& labels) {
  os << "{";
  for (size_t i = 0; i < labels.size(); ++i) {
    if (i) os << ", ";
    os << '"' << labels[i] << '"';
  }
  os << "}";
}

void print_statements(std::ostream& os, const std::vector<Statement>& stmts, int indent);

void print_statement(std::ostream& os, const Statement& s, int indent) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  os << pad;
  if (const auto* st = std::get_if<SendStmt>(&s.node)) {
    os << "send " << st->channel << " \"" << st->label << "\"\n";
  } else if (const auto* st = std::get_if<ReceiveStmt>(&s.node)) {
    os << "receive " << st->channel << " ";
    print_label_set(os, st->expected);
    if (st->bind) os << " -> " << *st->bind;
    os << "\n";
  } else if (const auto* st = std::get_if<AcquireStmt>(&s.node)) {
    os << "acquire " << st->resource << "\n";
  } else if (const auto* st = std::get_if<ReleaseStmt>(&s.node)) {
    os << "release " << st->resource << "\n";
  } else if (const auto* st = std::get_if<CounterAcquireStmt>(&s.node)) {
    os << "ctr_acquire " << st->resource;
    if (st->amount != 1) os << " " << st->amount;
    os << "\n";
  } else if (const auto* st = std::get_if<CounterReleaseStmt>(&s.node)) {
    os << "ctr_release " << st->resource;
    if (st->amount != 1) os << " " << st->amount;
    os << "\n";
  } else if (const auto* st = std::get_if<AssignStmt>(&s.node)) {
    os << st->local << " = ";
    print_expr(os, *st->value, 0);
    os << "\n";
  } else if (const auto* st = std::get_if<IfStmt>(&s.node)) {
    os << "if ";
    print_expr(os, *st->cond, 0);
    os << "\n";
    print_statements(os, st->then_body, indent + 1);
    if (!st->else_body.empty()) {
      os << pad << "else\n";
      print_statements(os, st->else_body, indent + 1);
    }
    os << pad << "end\n";
  } else if (const auto* st = std::get_if<WhileStmt>(&s.node)) {
    os << "while ";
    print_expr(os, *st->cond, 0);
    os << "\n";
    print_statements(os, st->body, indent + 1);
    os << pad << "end\n";
  } else if (const auto* st = std::get_if<EitherStmt>(&s.node)) {
    os << "either\n";
    for (size_t i = 0; i < st->branches.size(); ++i) {
      if (i) os << pad << "or\n";
      print_statements(os, st->branches[i], indent + 1);
    }
    os << pad << "end\n";
  } else if (const auto* st = std::get_if<GotoStmt>(&s.node)) {
    os << "goto " << st->target << "\n";
  } else if (std::holds_alternative<SkipStmt>(s.node)) {
    os << "skip\n";
  }
}

void print_statements(std::ostream& os, const std::vector<Statement>& stmts, int indent) {
  for (const auto& s : stmts) print_statement(os, s, indent);
}

}  // namespace

std::string print_protocol(const ProtocolProgram& p) {
  std::ostringstream os;
  for (size_t pi = 0; pi < p.processes.size(); ++pi) {
    const auto& proc = p.processes[pi];
    if (pi) os << "\n";
    if (proc.fair) os << "fair ";
    os << "process " << proc.agent << "\n";
    for (const auto& l : proc.locals) {
      os << "  local " << l.name << " : ";
      if (l.is_bool) {
        os << "bool = " << (l.init ? "true" : "false");
      } else {
        os << "int[" << l.lo << ".." << l.hi << "] = " << l.init;
      }
      os << "\n";
    }
    for (const auto& step : proc.body) {
      os << "\n  " << step.label << ":\n";
      print_statements(os, step.statements, 2);
    }
  }
  return os.str();
}

// --- Bind check ----------------------------------------------------------

namespace {

struct BindWalker {
  const Topology& topo;
  const ProcessDef& proc;
  ValidationReport& report;

  std::string at(int line) const {
    return "process " + proc.agent + " (line " + std::to_string(line) + ")";
  }

  void check_list(const std::vector<Statement>& stmts) {
    for (const auto& s : stmts) check_statement(s);
  }

  void check_statement(const Statement& s) {
    if (const auto* st = std::get_if<SendStmt>(&s.node)) {
      const ChannelDecl* ch = topo.find_channel(st->channel);
      if (ch == nullptr) {
        report.add_error(at(s.line), "send on undeclared channel '" + st->channel + "'");
        return;
      }
      if (std::find(ch->senders.begin(), ch->senders.end(), proc.agent) == ch->senders.end()) {
        report.add_error(at(s.line),
                         "'" + proc.agent + "' is not a sender on channel '" + st->channel + "'");
      }
      if (!ch->has_label(st->label)) {
        report.add_error(at(s.line), "label '" + st->label + "' is not in the vocabulary of '" +
                                         st->channel + "'");
      }
    } else if (const auto* st = std::get_if<ReceiveStmt>(&s.node)) {
      const ChannelDecl* ch = topo.find_channel(st->channel);
      if (ch == nullptr) {
        report.add_error(at(s.line), "receive on undeclared channel '" + st->channel + "'");
        return;
      }
      if (std::find(ch->receivers.begin(), ch->receivers.end(), proc.agent) ==
          ch->receivers.end()) {
        report.add_error(at(s.line), "'" + proc.agent + "' is not a receiver on channel '" +
                                         st->channel + "'");
      }
      for (const auto& l : st->expected) {
        if (!ch->has_label(l)) {
          report.add_error(at(s.line),
                           "label '" + l + "' is not in the vocabulary of '" + st->channel + "'");
        }
      }
    } else if (const auto* st = std::get_if<AcquireStmt>(&s.node)) {
      check_resource(s.line, st->resource, ResourceKind::Lock, "acquire");
    } else if (const auto* st = std::get_if<ReleaseStmt>(&s.node)) {
      check_resource(s.line, st->resource, ResourceKind::Lock, "release");
    } else if (const auto* st = std::get_if<CounterAcquireStmt>(&s.node)) {
      check_resource(s.line, st->resource, ResourceKind::Counter, "ctr_acquire");
    } else if (const auto* st = std::get_if<CounterReleaseStmt>(&s.node)) {
      check_resource(s.line, st->resource, ResourceKind::Counter, "ctr_release");
    } else if (const auto* st = std::get_if<IfStmt>(&s.node)) {
      check_list(st->then_body);
      check_list(st->else_body);
    } else if (const auto* st = std::get_if<WhileStmt>(&s.node)) {
      check_list(st->body);
    } else if (const auto* st = std::get_if<EitherStmt>(&s.node)) {
      for (const auto& branch : st->branches) {
        check_list(branch);
        // The atomicity hazard: a receive whose guard is evaluated after the
        // branch has already performed other work.
        for (size_t i = 1; i < branch.size(); ++i) {
          flag_late_receives(branch[i]);
        }
      }
    }
  }

  void flag_late_receives(const Statement& s) {
    if (std::holds_alternative<ReceiveStmt>(s.node)) {
      report.add_advisory(at(s.line),
                          "receive is not the first statement of its either branch; branch "
                          "selection commits before message availability is known");
    } else if (const auto* st = std::get_if<IfStmt>(&s.node)) {
      for (const auto& inner : st->then_body) flag_late_receives(inner);
      for (const auto& inner : st->else_body) flag_late_receives(inner);
    }
  }

  void check_resource(int line, const std::string& id, ResourceKind want, const char* what) {
    const ResourceDecl* r = topo.find_resource(id);
    if (r == nullptr) {
      report.add_error(at(line), std::string(what) + " of undeclared resource '" + id + "'");
      return;
    }
    if (r->kind != want) {
      report.add_error(at(line), std::string(what) + " of '" + id + "' needs a " +
                                     (want == ResourceKind::Lock ? "Lock" : "Counter") +
                                     ", but it is a " +
                                     (r->kind == ResourceKind::Lock ? "Lock" : "Counter"));
    }
  }
};

}  // namespace

ValidationReport bind_check(const ProtocolProgram& p, const Topology& t) {
  ValidationReport report;

  for (const auto& proc : p.processes) {
    if (t.find_agent(proc.agent) == nullptr) {
      report.add_error("process " + proc.agent,
                       "process does not correspond to a declared agent");
    }
  }
  for (const auto& a : t.agents) {
    if (p.find_process(a.id) == nullptr) {
      report.add_error("agents", "agent '" + a.id + "' has no process");
    }
  }

  for (const auto& proc : p.processes) {
    if (t.find_agent(proc.agent) == nullptr) continue;
    BindWalker walker{t, proc, report};
    for (const auto& step : proc.body) walker.check_list(step.statements);
  }

  return report;
}

}  // namespace coord
