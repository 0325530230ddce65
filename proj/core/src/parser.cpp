#include <cctype>
#include <map>
#include <set>

#include "cellmorph/program.hpp"

namespace cellmorph {

namespace {

struct Token {
    enum class Kind { Id, Int, Punct, End } kind;
    std::string text;
    int64_t value = 0;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return tok_; }
    Token next() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        skip_ws();
        tok_.loc = {line_, col_};
        if (pos_ >= text_.size()) {
            tok_.kind = Token::Kind::End;
            tok_.text = "<eof>";
            return;
        }
        char c = text_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
                take();
            tok_.kind = Token::Kind::Id;
            tok_.text = text_.substr(start, pos_ - start);
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                take();
            tok_.kind = Token::Kind::Int;
            tok_.text = text_.substr(start, pos_ - start);
            tok_.value = std::stoll(tok_.text);
            return;
        }
        static const char* two[] = {"<=", ">=", "==", "!=", "&&", "||", "=>"};
        for (const char* op : two) {
            if (text_.compare(pos_, 2, op) == 0) {
                tok_.kind = Token::Kind::Punct;
                tok_.text = op;
                take();
                take();
                return;
            }
        }
        tok_.kind = Token::Kind::Punct;
        tok_.text = std::string(1, c);
        take();
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n' || c == ' ' || c == '\t' || c == '\r') {
                take();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '/') {
                while (pos_ < text_.size() && text_[pos_] != '\n') take();
            } else if (c == '/' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '*') {
                take();
                take();
                while (pos_ + 1 < text_.size() &&
                       !(text_[pos_] == '*' && text_[pos_ + 1] == '/'))
                    take();
                if (pos_ + 1 < text_.size()) {
                    take();
                    take();
                }
            } else {
                break;
            }
        }
    }

    void take() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    const std::string& text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    Token tok_;
};

class Parser {
public:
    explicit Parser(const std::string& text) : lex_(text) {}

    Program parse_program() {
        Program p;
        while (is_id("int") || is_id("real")) parse_decl(p);
        program_ = &p;
        while (!at_end() && !is_id("assert")) p.body.push_back(parse_stmt(p));
        while (is_id("assert")) p.properties.push_back(parse_prop(p));
        expect_end();
        validate(p);
        return p;
    }

    std::vector<PropertySpec> parse_hint_file(const Program& p) {
        program_ = &p;
        std::vector<PropertySpec> hints;
        while (!at_end()) {
            expect_id("at");
            Token name = expect(Token::Kind::Id);
            expect_punct(":");
            PropertySpec spec = parse_prop_tail(p);
            spec.at = name.text;
            spec.is_hint = true;
            hints.push_back(std::move(spec));
        }
        return hints;
    }

private:
    Lexer lex_;
    const Program* program_ = nullptr;
    std::vector<std::pair<std::string, Sort>>* binders_ = nullptr;
    std::set<std::string> labels_;

    bool at_end() { return lex_.peek().kind == Token::Kind::End; }
    bool is_id(const std::string& s) {
        return lex_.peek().kind == Token::Kind::Id && lex_.peek().text == s;
    }
    bool is_punct(const std::string& s) {
        return lex_.peek().kind == Token::Kind::Punct && lex_.peek().text == s;
    }
    Token expect(Token::Kind k) {
        if (lex_.peek().kind != k) err("unexpected token '" + lex_.peek().text + "'");
        return lex_.next();
    }
    void expect_punct(const std::string& s) {
        if (!is_punct(s)) err("expected '" + s + "', found '" + lex_.peek().text + "'");
        lex_.next();
    }
    void expect_id(const std::string& s) {
        if (!is_id(s)) err("expected '" + s + "', found '" + lex_.peek().text + "'");
        lex_.next();
    }
    void expect_end() {
        if (!at_end()) err("trailing input '" + lex_.peek().text + "'");
    }
    [[noreturn]] void err(const std::string& msg) { throw ParseError(msg, lex_.peek().loc); }

    void parse_decl(Program& p) {
        Token kw = lex_.next();
        Sort sort = kw.text == "real" ? Sort::Real : Sort::Int;
        Token name = expect(Token::Kind::Id);
        check_fresh(p, name);
        if (is_punct("[")) {
            lex_.next();
            ArrayDecl a;
            a.name = name.text;
            a.value_sort = sort;
            a.loc = name.loc;
            if (is_punct("]")) {
                a.index = IndexKind::Int1;
            } else if (is_id("real")) {
                lex_.next();
                a.index = IndexKind::Real1;
            } else if (is_punct(",")) {
                lex_.next();
                a.index = IndexKind::Int2;
            } else {
                a.range.push_back(parse_expr(p, Sort::Int));
                if (is_punct(",")) {
                    lex_.next();
                    a.index = IndexKind::Int2;
                    a.range.push_back(parse_expr(p, Sort::Int));
                }
            }
            expect_punct("]");
            if (is_punct("=")) {
                lex_.next();
                if (lex_.peek().kind == Token::Kind::Id) {
                    Token src = lex_.next();
                    if (!p.find_array(src.text)) err("unknown source array '" + src.text + "'");
                    a.copy_of = src.text;
                } else {
                    Token v = expect(Token::Kind::Int);
                    a.init_value = a.value_sort == Sort::Real ? Term::real_lit(Value(v.value))
                                                              : Term::int_lit(v.value);
                }
            }
            expect_punct(";");
            p.arrays.push_back(std::move(a));
        } else {
            expect_punct(";");
            p.scalars.push_back({name.text, sort, name.loc});
        }
    }

    void check_fresh(const Program& p, const Token& name) {
        if (p.find_scalar(name.text) || p.find_array(name.text))
            throw ParseError("redeclaration of '" + name.text + "'", name.loc);
    }

    Stmt parse_stmt(Program& p) {
        Stmt s{};
        s.loc = lex_.peek().loc;
        // Label: an undeclared ID followed by ':'.
        if (lex_.peek().kind == Token::Kind::Id && !is_id("while") && !is_id("if") &&
            !is_id("assume") && !p.find_scalar(lex_.peek().text) &&
            !p.find_array(lex_.peek().text)) {
            Token lbl = lex_.next();
            if (!is_punct(":"))
                throw ParseError("undeclared identifier '" + lbl.text + "'", lbl.loc);
            lex_.next();
            if (!labels_.insert(lbl.text).second)
                throw ParseError("duplicate label '" + lbl.text + "'", lbl.loc);
            s = parse_stmt(p);
            if (!s.label.empty()) err("double label");
            s.label = lbl.text;
            return s;
        }
        if (is_id("while")) {
            lex_.next();
            expect_punct("(");
            s.kind = Stmt::Kind::While;
            s.while_.cond = parse_cond(p);
            expect_punct(")");
            s.while_.body = std::make_shared<StmtList>(parse_block(p));
            return s;
        }
        if (is_id("if")) {
            lex_.next();
            expect_punct("(");
            s.kind = Stmt::Kind::If;
            s.if_.cond = parse_cond(p);
            expect_punct(")");
            s.if_.then_body = std::make_shared<StmtList>(parse_block(p));
            if (is_id("else")) {
                lex_.next();
                s.if_.else_body = std::make_shared<StmtList>(parse_block(p));
            }
            return s;
        }
        if (is_id("assume")) {
            lex_.next();
            expect_punct("(");
            s.kind = Stmt::Kind::Assume;
            s.assume.cond = parse_cond(p);
            expect_punct(")");
            expect_punct(";");
            return s;
        }
        Token name = expect(Token::Kind::Id);
        if (is_punct("[")) {
            const ArrayDecl* a = p.find_array(name.text);
            if (!a) throw ParseError("undeclared array '" + name.text + "'", name.loc);
            lex_.next();
            s.kind = Stmt::Kind::Store;
            s.store.array = name.text;
            s.store.index.push_back(parse_expr(p, a->index_sort()));
            if (a->dims() == 2) {
                expect_punct(",");
                s.store.index.push_back(parse_expr(p, Sort::Int));
            }
            expect_punct("]");
            expect_punct("=");
            s.store.value = parse_expr(p, a->value_sort);
            expect_punct(";");
            return s;
        }
        const ScalarDecl* d = p.find_scalar(name.text);
        if (!d) throw ParseError("undeclared identifier '" + name.text + "'", name.loc);
        expect_punct("=");
        s.kind = Stmt::Kind::Assign;
        s.assign.lhs = name.text;
        s.assign.rhs = parse_expr(p, d->sort);
        expect_punct(";");
        return s;
    }

    StmtList parse_block(Program& p) {
        StmtList list;
        if (is_punct("{")) {
            lex_.next();
            while (!is_punct("}")) list.push_back(parse_stmt(p));
            lex_.next();
        } else {
            list.push_back(parse_stmt(p));
        }
        return list;
    }

    PropertySpec parse_prop(Program& p) {
        expect_id("assert");
        PropertySpec spec;
        if (is_id("at")) {
            lex_.next();
            Token name = expect(Token::Kind::Id);
            expect_punct(":");
            spec.at = name.text;
        }
        PropertySpec tail = parse_prop_tail(p);
        tail.at = spec.at;
        return tail;
    }

    PropertySpec parse_prop_tail(const Program& p) {
        PropertySpec spec;
        spec.loc = lex_.peek().loc;
        if (is_id("forall")) {
            lex_.next();
            for (;;) {
                Token b = expect(Token::Kind::Id);
                if (p.find_scalar(b.text) || p.find_array(b.text))
                    throw ParseError("binder '" + b.text + "' shadows a declaration", b.loc);
                spec.binders.emplace_back(b.text, Sort::Int);
                if (is_punct(",")) {
                    lex_.next();
                    continue;
                }
                break;
            }
            expect_punct(":");
        }
        binders_ = &spec.binders;
        spec.guard = parse_cond(p);
        expect_punct("=>");
        spec.conclusion = parse_cond(p);
        if (!is_punct(";")) err("expected ';'");
        lex_.next();
        binders_ = nullptr;
        infer_binder_sorts(p, spec);
        return spec;
    }

    // Binder sorts come from use: array index position or count sample.
    void infer_binder_sorts(const Program& p, PropertySpec& spec) {
        for (auto& [name, sort] : spec.binders) {
            sort = Sort::Int;
            for (const Term* t : {&spec.guard, &spec.conclusion}) {
                std::vector<const TermNode*> stack{&t->n()};
                while (!stack.empty()) {
                    const TermNode* n = stack.back();
                    stack.pop_back();
                    if (n->kind == TermKind::Cell) {
                        const ArrayDecl* a = p.find_array(n->name);
                        if (a && a->index == IndexKind::Real1 && !n->args.empty() &&
                            n->args[0].mentions(name))
                            sort = Sort::Real;
                    }
                    if (n->kind == TermKind::Count && n->args[0].mentions(name)) {
                        const ArrayDecl* a = p.find_array(n->name);
                        if (a) sort = a->value_sort;
                    }
                    for (const auto& a : n->args) stack.push_back(&a.n());
                }
            }
        }
    }

    Sort id_sort(const Program& p, const Token& t) {
        if (const ScalarDecl* d = p.find_scalar(t.text)) return d->sort;
        if (binders_) {
            for (auto& [name, sort] : *binders_)
                if (name == t.text) return Sort::Int;  // refined later
        }
        throw ParseError("undeclared identifier '" + t.text + "'", t.loc);
    }

    bool is_known_id(const Program& p, const std::string& name) {
        if (p.find_scalar(name)) return true;
        if (binders_)
            for (auto& [b, s] : *binders_)
                if (b == name) return true;
        return false;
    }

    Term coerce(Term t, Sort want) {
        if (t.sort() == want) return t;
        if (t.kind() == TermKind::Lit && want == Sort::Real) return Term::real_lit(t.n().lit);
        return t;
    }

    Term parse_expr(const Program& p, Sort want) {
        Term t = parse_additive(p);
        return coerce(std::move(t), want);
    }

    Term parse_additive(const Program& p) {
        Term t = parse_mul(p);
        while (is_punct("+") || is_punct("-")) {
            bool plus = lex_.peek().text == "+";
            lex_.next();
            Term rhs = parse_mul(p);
            if (t.sort() == Sort::Real || rhs.sort() == Sort::Real) {
                t = coerce(t, Sort::Real);
                rhs = coerce(rhs, Sort::Real);
            }
            t = plus ? Term::add(t, rhs) : Term::sub(t, rhs);
        }
        return t;
    }

    Term parse_mul(const Program& p) {
        // constant '*' factor, or factor ('%' constant)?
        if (lex_.peek().kind == Token::Kind::Int) {
            Token c = lex_.next();
            if (is_punct("*")) {
                lex_.next();
                Term f = parse_factor(p);
                return parse_mod_suffix(Term::mul_const(Value(c.value), f));
            }
            Term lit = Term::int_lit(c.value);
            return parse_mod_suffix(lit);
        }
        Term f = parse_factor(p);
        if (is_punct("*")) {
            lex_.next();
            Token c = expect(Token::Kind::Int);
            return parse_mod_suffix(Term::mul_const(Value(c.value), f));
        }
        return parse_mod_suffix(f);
    }

    Term parse_mod_suffix(Term t) {
        while (is_punct("%")) {
            lex_.next();
            Token m = expect(Token::Kind::Int);
            if (m.value <= 0) throw ParseError("modulus must be a positive constant", m.loc);
            t = Term::mod_const(t, m.value);
        }
        return t;
    }

    Term parse_factor(const Program& p) {
        if (is_punct("(")) {
            lex_.next();
            Term t = parse_additive(p);
            expect_punct(")");
            return parse_mod_suffix(t);
        }
        if (is_punct("-")) {
            lex_.next();
            Term t = parse_factor(p);
            return Term::neg(t);
        }
        if (is_punct("#")) {
            lex_.next();
            Token name = expect(Token::Kind::Id);
            std::string arr = name.text;
            bool orig = false;
            if (!p.find_array(arr) && arr.size() > 1 && arr.back() == '0' &&
                p.find_array(arr.substr(0, arr.size() - 1))) {
                arr = arr.substr(0, arr.size() - 1);
                orig = true;
            }
            const ArrayDecl* a = p.find_array(arr);
            if (!a) throw ParseError("count of undeclared array '" + name.text + "'", name.loc);
            expect_punct("(");
            Term z = parse_additive(p);
            expect_punct(")");
            return Term::count(arr, coerce(z, a->value_sort), orig);
        }
        if (lex_.peek().kind == Token::Kind::Int) {
            Token c = lex_.next();
            return Term::int_lit(c.value);
        }
        Token name = expect(Token::Kind::Id);
        if (is_punct("[")) {
            const ArrayDecl* a = p.find_array(name.text);
            if (!a) throw ParseError("undeclared array '" + name.text + "'", name.loc);
            lex_.next();
            std::vector<Term> idx;
            idx.push_back(coerce(parse_additive(p), a->index_sort()));
            if (a->dims() == 2) {
                expect_punct(",");
                idx.push_back(parse_additive(p));
            }
            expect_punct("]");
            return Term::cell(a->name, std::move(idx), a->value_sort);
        }
        if (p.find_array(name.text))
            throw ParseError("array '" + name.text + "' used without index", name.loc);
        if (!is_known_id(p, name.text))
            throw ParseError("undeclared identifier '" + name.text + "'", name.loc);
        return Term::var(name.text, id_sort(p, name));
    }

    Term parse_cond(const Program& p) { return parse_or(p); }

    Term parse_or(const Program& p) {
        Term t = parse_and(p);
        while (is_punct("||")) {
            lex_.next();
            t = Term::or_(t, parse_and(p));
        }
        return t;
    }

    Term parse_and(const Program& p) {
        Term t = parse_not(p);
        while (is_punct("&&")) {
            lex_.next();
            t = Term::and_(t, parse_not(p));
        }
        return t;
    }

    Term parse_not(const Program& p) {
        if (is_punct("!")) {
            lex_.next();
            return Term::not_(parse_not(p));
        }
        if (is_punct("(")) {
            // Could be a parenthesized condition or arithmetic expr.
            // Parse a full condition; comparisons inside handle arithmetic.
            lex_.next();
            Term t = parse_or(p);
            expect_punct(")");
            if (t.sort() == Sort::Bool) return t;
            return parse_cmp_tail(p, t);
        }
        if (is_id("true")) {
            lex_.next();
            return Term::bool_lit(true);
        }
        if (is_id("false")) {
            lex_.next();
            return Term::bool_lit(false);
        }
        Term lhs = parse_additive(p);
        return parse_cmp_tail(p, lhs);
    }

    Term parse_cmp_tail(const Program& p, Term lhs) {
        TermKind k;
        if (is_punct("==")) k = TermKind::Eq;
        else if (is_punct("!=")) k = TermKind::Ne;
        else if (is_punct("<")) k = TermKind::Lt;
        else if (is_punct("<=")) k = TermKind::Le;
        else if (is_punct(">")) k = TermKind::Gt;
        else if (is_punct(">=")) k = TermKind::Ge;
        else err("expected comparison operator");
        lex_.next();
        Term rhs = parse_additive(p);
        if (lhs.sort() == Sort::Real || rhs.sort() == Sort::Real) {
            lhs = coerce(lhs, Sort::Real);
            rhs = coerce(rhs, Sort::Real);
        }
        return Term::cmp(k, lhs, rhs);
    }

    void validate(const Program& p) {
        // Statement conditions must be array-free; property cell arity checked later.
        std::vector<const StmtList*> stack{&p.body};
        while (!stack.empty()) {
            const StmtList* list = stack.back();
            stack.pop_back();
            for (const auto& s : *list) {
                switch (s.kind) {
                    case Stmt::Kind::Assume:
                        if (s.assume.cond.has_array_refs())
                            throw ParseError("array reference in assume condition", s.loc);
                        break;
                    case Stmt::Kind::While:
                        if (s.while_.cond.has_array_refs())
                            throw ParseError("array reference in loop condition", s.loc);
                        stack.push_back(s.while_.body.get());
                        break;
                    case Stmt::Kind::If:
                        if (s.if_.cond.has_array_refs())
                            throw ParseError("array reference in if condition", s.loc);
                        stack.push_back(s.if_.then_body.get());
                        if (s.if_.else_body) stack.push_back(s.if_.else_body.get());
                        break;
                    default:
                        break;
                }
            }
        }
    }
};

}  // namespace

Program parse(const std::string& text) {
    Parser parser(text);
    return parser.parse_program();
}

std::vector<PropertySpec> parse_hints(const Program& p, const std::string& text) {
    Parser parser(text);
    return parser.parse_hint_file(p);
}

}  // namespace cellmorph
