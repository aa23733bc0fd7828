#include <cmath>
#include <ostream>

#include "rjs/error.hpp"
#include "rjs/runtime.hpp"
#include "rjs/script.hpp"

namespace rjs::script {

void Environment::define(const std::string& name, ScriptValue value) { bindings_[name] = std::move(value); }

const ScriptValue* Environment::find(const std::string& name) const {
  for (const Environment* env = this; env; env = env->parent_.get()) {
    if (auto it = env->bindings_.find(name); it != env->bindings_.end()) return &it->second;
  }
  return nullptr;
}

void Environment::assign(const std::string& name, ScriptValue value) {
  for (Environment* env = this; env; env = env->parent_.get()) {
    if (auto it = env->bindings_.find(name); it != env->bindings_.end()) {
      it->second = std::move(value);
      return;
    }
  }
  throw Error(Errc::Name, "assignment to undeclared name '" + name + "'");
}

/// A function literal closed over its defining scope. Keeps the program
/// that owns the literal alive.
class Closure : public Callable {
 public:
  Closure(Interpreter& interp, const FnLit& fn, EnvPtr env, std::shared_ptr<const Program> owner)
      : interp_(interp), fn_(fn), env_(std::move(env)), owner_(std::move(owner)) {}

  ScriptValue call(std::vector<ScriptValue> args) override {
    auto scope = std::make_shared<Environment>(env_);
    for (std::size_t i = 0; i < fn_.params.size(); ++i)
      scope->define(fn_.params[i], i < args.size() ? std::move(args[i]) : ScriptValue{Null{}});
    return interp_.exec_block(fn_.body, scope, owner_);
  }

  std::string describe() const override {
    std::string out = "<fn(";
    for (std::size_t i = 0; i < fn_.params.size(); ++i) out += (i ? ", " : "") + fn_.params[i];
    return out + ")>";
  }

 private:
  Interpreter& interp_;
  const FnLit& fn_;
  EnvPtr env_;
  std::shared_ptr<const Program> owner_;
};

Interpreter::Interpreter(Runtime& runtime, std::ostream& out)
    : runtime_(runtime), out_(out), globals_(std::make_shared<Environment>()) {
  globals_->define("root", NsRef{""});
  globals_->define("print", std::make_shared<NativeFunction>("print", [this](std::vector<ScriptValue> args) {
    for (std::size_t i = 0; i < args.size(); ++i) out_ << (i ? " " : "") << render(args[i]);
    out_ << '\n';
    return ScriptValue{Null{}};
  }));
  globals_->define("pump", std::make_shared<NativeFunction>("pump", [this](std::vector<ScriptValue>) {
    return ScriptValue{static_cast<double>(runtime_.dispatcher.process_events())};
  }));
}

ScriptValue Interpreter::run(std::shared_ptr<const Program> program) {
  return exec_block(*program, globals_, program);
}

ScriptValue Interpreter::run_source(std::string_view source) {
  return run(std::make_shared<const Program>(parse(source)));
}

ScriptValue Interpreter::exec_block(const std::vector<Stmt>& body, const EnvPtr& env,
                                    const std::shared_ptr<const Program>& owner) {
  ScriptValue last = Null{};
  for (const auto& stmt : body) last = exec(stmt, env, owner);
  return last;
}

ScriptValue Interpreter::exec(const Stmt& stmt, const EnvPtr& env, const std::shared_ptr<const Program>& owner) {
  if (const auto* let = std::get_if<LetStmt>(&stmt.node)) {
    env->define(let->name, eval(let->value, env, owner));
    return Null{};
  }
  if (const auto* assign = std::get_if<AssignStmt>(&stmt.node)) {
    if (const auto* id = std::get_if<Ident>(&assign->target.node)) {
      env->assign(id->name, eval(assign->value, env, owner));
    } else {
      const auto& m = std::get<Member>(assign->target.node);
      ScriptValue object = eval(*m.object, env, owner);
      runtime_.bridge.assign(object, m.name, eval(assign->value, env, owner));
    }
    return Null{};
  }
  return eval(std::get<ExprStmt>(stmt.node).value, env, owner);
}

namespace {

ScriptValue arithmetic(char op, const ScriptValue& lhs, const ScriptValue& rhs) {
  const auto* a = std::get_if<double>(&lhs);
  const auto* b = std::get_if<double>(&rhs);
  if (a && b) {
    switch (op) {
      case '+': return *a + *b;
      case '-': return *a - *b;
      case '*': return *a * *b;
      case '/': return *a / *b;
      case '%': return std::fmod(*a, *b);
    }
  }
  if (op == '+' && (std::holds_alternative<std::string>(lhs) || std::holds_alternative<std::string>(rhs)))
    return render(lhs) + render(rhs);
  throw Error(Errc::Type, std::string("operator ") + op + " not defined for " + std::string(script_kind_name(lhs)) +
                              " and " + std::string(script_kind_name(rhs)));
}

}  // namespace

ScriptValue Interpreter::apply(const ScriptValue& callee, std::vector<ScriptValue> args) {
  if (const auto* fn = std::get_if<CallablePtr>(&callee)) return (*fn)->call(std::move(args));
  if (std::holds_alternative<FnRef>(callee) || std::holds_alternative<TypeRef>(callee) ||
      std::holds_alternative<MethodRef>(callee)) {
    InvokeResult r = runtime_.bridge.invoke(callee, std::move(args));
    if (const auto* pending = std::get_if<PendingCall>(&r)) return static_cast<double>(pending->id);
    return std::get<ScriptValue>(std::move(r));
  }
  throw Error(Errc::Type, render(callee) + " (" + std::string(script_kind_name(callee)) + ") is not callable");
}

ScriptValue Interpreter::eval(const Expr& expr, const EnvPtr& env, const std::shared_ptr<const Program>& owner) {
  struct Visitor {
    Interpreter& self;
    const EnvPtr& env;
    const std::shared_ptr<const Program>& owner;

    ScriptValue operator()(const NumLit& n) const { return n.value; }
    ScriptValue operator()(const StrLit& s) const { return s.value; }
    ScriptValue operator()(const BoolLit& b) const { return b.value; }
    ScriptValue operator()(const NullLit&) const { return Null{}; }
    ScriptValue operator()(const Ident& id) const {
      const ScriptValue* v = env->find(id.name);
      if (!v) throw Error(Errc::Name, "'" + id.name + "' is not defined");
      return *v;
    }
    ScriptValue operator()(const Member& m) const {
      return self.runtime_.bridge.member(self.eval(*m.object, env, owner), m.name);
    }
    ScriptValue operator()(const Call& c) const {
      ScriptValue callee = self.eval(*c.callee, env, owner);
      std::vector<ScriptValue> args;
      args.reserve(c.args.size());
      for (const auto& a : c.args) args.push_back(self.eval(a, env, owner));
      return self.apply(callee, std::move(args));
    }
    ScriptValue operator()(const FnLit& fn) const {
      return CallablePtr(std::make_shared<Closure>(self, fn, env, owner));
    }
    ScriptValue operator()(const BinExpr& b) const {
      ScriptValue lhs = self.eval(*b.lhs, env, owner);
      ScriptValue rhs = self.eval(*b.rhs, env, owner);
      return arithmetic(b.op, lhs, rhs);
    }
  };
  return std::visit(Visitor{*this, env, owner}, expr.node);
}

}  // namespace rjs::script
