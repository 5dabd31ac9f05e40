#include <sparsesos/poly.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>

namespace sparsesos
{

//------------------------------------------------------------------------------
// Exponent
//------------------------------------------------------------------------------

Exponent::Exponent(std::vector<Entry> entries)
{
    std::sort(entries.begin(), entries.end());
    for (const auto& [var, pw] : entries)
    {
        if (var < 0)
        {
            throw InputError("negative variable index in exponent");
        }
        if (pw < 0)
        {
            throw InputError("negative power in exponent");
        }
        if (pw == 0)
        {
            continue;
        }
        if (!m_entries.empty() && m_entries.back().first == var)
        {
            m_entries.back().second += pw;
        }
        else
        {
            m_entries.emplace_back(var, pw);
        }
        m_degree += pw;
    }
}

Exponent Exponent::unit(int var, int power)
{
    return Exponent({{var, power}});
}

Exponent Exponent::from_dense(std::span<const int> powers)
{
    std::vector<Entry> e;
    for (std::size_t i = 0; i < powers.size(); ++i)
    {
        if (powers[i] != 0)
        {
            e.emplace_back(static_cast<int>(i), powers[i]);
        }
    }
    return Exponent(std::move(e));
}

int Exponent::power(int var) const noexcept
{
    auto it = std::lower_bound(m_entries.begin(), m_entries.end(), Entry{var, 0});
    return (it != m_entries.end() && it->first == var) ? it->second : 0;
}

std::vector<int> Exponent::support() const
{
    std::vector<int> s;
    s.reserve(m_entries.size());
    for (const auto& e : m_entries)
    {
        s.push_back(e.first);
    }
    return s;
}

std::vector<int> Exponent::dense(int n) const
{
    std::vector<int> d(static_cast<std::size_t>(n), 0);
    for (const auto& [var, pw] : m_entries)
    {
        if (var >= n)
        {
            throw InputError("exponent variable outside dense range");
        }
        d[static_cast<std::size_t>(var)] = pw;
    }
    return d;
}

bool Exponent::is_even() const noexcept
{
    return std::all_of(m_entries.begin(), m_entries.end(),
                       [](const Entry& e) { return e.second % 2 == 0; });
}

bool Exponent::supported_in(std::span<const int> sorted_vars) const
{
    return std::all_of(m_entries.begin(), m_entries.end(), [&](const Entry& e) {
        return std::binary_search(sorted_vars.begin(), sorted_vars.end(), e.first);
    });
}

Exponent Exponent::operator+(const Exponent& other) const
{
    Exponent r;
    r.m_entries.reserve(m_entries.size() + other.m_entries.size());
    auto a = m_entries.begin();
    auto b = other.m_entries.begin();
    while (a != m_entries.end() || b != other.m_entries.end())
    {
        if (b == other.m_entries.end() || (a != m_entries.end() && a->first < b->first))
        {
            r.m_entries.push_back(*a++);
        }
        else if (a == m_entries.end() || b->first < a->first)
        {
            r.m_entries.push_back(*b++);
        }
        else
        {
            r.m_entries.emplace_back(a->first, a->second + b->second);
            ++a;
            ++b;
        }
    }
    r.m_degree = m_degree + other.m_degree;
    return r;
}

std::string Exponent::to_string() const
{
    if (m_entries.empty())
    {
        return "1";
    }
    std::string s;
    for (const auto& [var, pw] : m_entries)
    {
        if (!s.empty())
        {
            s += '*';
        }
        s += 'x';
        s += std::to_string(var + 1);
        if (pw != 1)
        {
            s += '^';
            s += std::to_string(pw);
        }
    }
    return s;
}

bool GradedLex::operator()(const Exponent& a, const Exponent& b) const noexcept
{
    if (a.degree() != b.degree())
    {
        return a.degree() < b.degree();
    }
    const auto& ea = a.entries();
    const auto& eb = b.entries();
    const std::size_t k = std::min(ea.size(), eb.size());
    for (std::size_t i = 0; i < k; ++i)
    {
        if (ea[i].first != eb[i].first)
        {
            // a has a positive power at a lower-index variable where b has 0.
            return ea[i].first < eb[i].first;
        }
        if (ea[i].second != eb[i].second)
        {
            return ea[i].second > eb[i].second;
        }
    }
    // Equal degree and a common prefix forces equality.
    return false;
}

Clique make_clique(std::vector<int> vars, int n)
{
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    if (vars.empty())
    {
        throw InputError("clique must be nonempty");
    }
    if (vars.front() < 0 || vars.back() >= n)
    {
        throw InputError("clique variable outside [1, n]");
    }
    return vars;
}

std::size_t binomial(int n, int k)
{
    if (k < 0 || k > n)
    {
        return 0;
    }
    std::size_t r = 1;
    for (int i = 1; i <= k; ++i)
    {
        r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
    }
    return r;
}

std::vector<Exponent> monomials_up_to(std::span<const int> vars, int d)
{
    std::vector<Exponent> out;
    std::vector<Exponent::Entry> cur;
    std::function<void(std::size_t, int)> rec = [&](std::size_t pos, int left) {
        if (pos == vars.size())
        {
            out.emplace_back(cur);
            return;
        }
        for (int p = 0; p <= left; ++p)
        {
            if (p > 0)
            {
                cur.emplace_back(vars[pos], p);
            }
            rec(pos + 1, left - p);
            if (p > 0)
            {
                cur.pop_back();
            }
        }
    };
    rec(0, d);
    std::sort(out.begin(), out.end(), GradedLex{});
    return out;
}

//------------------------------------------------------------------------------
// Polynomial
//------------------------------------------------------------------------------

Polynomial Polynomial::constant(int n, double c)
{
    Polynomial p(n);
    p.add_term(Exponent{}, c);
    return p;
}

Polynomial Polynomial::variable(int n, int var)
{
    if (var < 0 || var >= n)
    {
        throw InputError("variable index out of range");
    }
    Polynomial p(n);
    p.add_term(Exponent::unit(var), 1.0);
    return p;
}

Polynomial Polynomial::monomial(int n, const Exponent& e, double c)
{
    Polynomial p(n);
    p.add_term(e, c);
    return p;
}

int Polynomial::degree() const noexcept
{
    int d = 0;
    for (const auto& t : m_terms)
    {
        d = std::max(d, t.first.degree());
    }
    return d;
}

double Polynomial::coefficient(const Exponent& e) const
{
    auto it = m_terms.find(e);
    return it == m_terms.end() ? 0.0 : it->second;
}

double Polynomial::max_abs_coefficient() const noexcept
{
    double m = 0.0;
    for (const auto& t : m_terms)
    {
        m = std::max(m, std::abs(t.second));
    }
    return m;
}

std::vector<int> Polynomial::variables() const
{
    std::set<int> vs;
    for (const auto& t : m_terms)
    {
        for (const auto& e : t.first.entries())
        {
            vs.insert(e.first);
        }
    }
    return {vs.begin(), vs.end()};
}

void Polynomial::add_term(const Exponent& e, double c)
{
    if (!e.is_zero() && e.entries().back().first >= m_n)
    {
        throw InputError("term uses variable x" + std::to_string(e.entries().back().first + 1) +
                         " beyond n = " + std::to_string(m_n));
    }
    if (c == 0.0)
    {
        return;
    }
    auto [it, inserted] = m_terms.try_emplace(e, c);
    if (!inserted)
    {
        it->second += c;
        if (it->second == 0.0)
        {
            m_terms.erase(it);
        }
    }
}

Polynomial& Polynomial::operator+=(const Polynomial& other)
{
    m_n = std::max(m_n, other.m_n);
    for (const auto& [e, c] : other.m_terms)
    {
        add_term(e, c);
    }
    return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other)
{
    m_n = std::max(m_n, other.m_n);
    for (const auto& [e, c] : other.m_terms)
    {
        add_term(e, -c);
    }
    return *this;
}

Polynomial& Polynomial::operator*=(double s)
{
    if (s == 0.0)
    {
        m_terms.clear();
        return *this;
    }
    for (auto& t : m_terms)
    {
        t.second *= s;
    }
    return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b)
{
    Polynomial r(std::max(a.m_n, b.m_n));
    for (const auto& [ea, ca] : a.m_terms)
    {
        for (const auto& [eb, cb] : b.m_terms)
        {
            r.add_term(ea + eb, ca * cb);
        }
    }
    return r;
}

Polynomial Polynomial::pow(int k) const
{
    if (k < 0)
    {
        throw InputError("negative polynomial power");
    }
    Polynomial r = constant(m_n, 1.0);
    for (int i = 0; i < k; ++i)
    {
        r = r * *this;
    }
    return r;
}

double Polynomial::evaluate(std::span<const double> x) const
{
    if (static_cast<int>(x.size()) != m_n)
    {
        throw InputError("evaluation point has dimension " + std::to_string(x.size()) +
                         ", expected " + std::to_string(m_n));
    }
    double sum = 0.0;
    for (const auto& [e, c] : m_terms)
    {
        double v = c;
        for (const auto& [var, pw] : e.entries())
        {
            double xi = x[static_cast<std::size_t>(var)];
            double p = 1.0;
            for (int k = 0; k < pw; ++k)
            {
                p *= xi;
            }
            v *= p;
        }
        sum += v;
    }
    return sum;
}

Polynomial Polynomial::derivative(int var) const
{
    Polynomial r(m_n);
    for (const auto& [e, c] : m_terms)
    {
        const int pw = e.power(var);
        if (pw == 0)
        {
            continue;
        }
        auto entries = e.entries();
        for (auto& en : entries)
        {
            if (en.first == var)
            {
                en.second -= 1;
            }
        }
        r.add_term(Exponent(std::move(entries)), c * pw);
    }
    return r;
}

Polynomial Polynomial::compose(std::span<const Polynomial> images) const
{
    if (static_cast<int>(images.size()) < m_n)
    {
        throw InputError("compose needs one image per variable");
    }
    int nout = 0;
    for (const auto& im : images)
    {
        nout = std::max(nout, im.num_vars());
    }
    // Cache powers of each image as they are requested.
    std::vector<std::vector<Polynomial>> powers(images.size());
    auto image_pow = [&](int var, int k) -> const Polynomial& {
        auto& cache = powers[static_cast<std::size_t>(var)];
        if (cache.empty())
        {
            cache.push_back(constant(nout, 1.0));
        }
        while (static_cast<int>(cache.size()) <= k)
        {
            cache.push_back(cache.back() * images[static_cast<std::size_t>(var)]);
        }
        return cache[static_cast<std::size_t>(k)];
    };
    Polynomial r(nout);
    for (const auto& [e, c] : m_terms)
    {
        Polynomial t = constant(nout, c);
        for (const auto& [var, pw] : e.entries())
        {
            t = t * image_pow(var, pw);
        }
        r += t;
    }
    r.m_n = nout;
    return r;
}

Polynomial Polynomial::with_num_vars(int n) const
{
    Polynomial r(n);
    for (const auto& [e, c] : m_terms)
    {
        r.add_term(e, c);
    }
    return r;
}

namespace
{

std::string format_double(double v)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace

std::string Polynomial::to_string() const
{
    if (m_terms.empty())
    {
        return "0";
    }
    std::string s;
    bool first = true;
    for (const auto& [e, c] : m_terms)
    {
        const bool neg = c < 0.0;
        const double a = std::abs(c);
        if (first)
        {
            if (neg)
            {
                s += '-';
            }
        }
        else
        {
            s += neg ? " - " : " + ";
        }
        first = false;
        if (e.is_zero())
        {
            s += format_double(a);
        }
        else if (a == 1.0)
        {
            s += e.to_string();
        }
        else
        {
            s += format_double(a);
            s += '*';
            s += e.to_string();
        }
    }
    return s;
}

//------------------------------------------------------------------------------
// Parser
//------------------------------------------------------------------------------

namespace
{

class PolyParser
{
public:
    PolyParser(std::string_view text, int n) : m_text(text), m_n(n) {}

    Polynomial parse()
    {
        Polynomial p(m_n);
        skip_ws();
        if (at_end())
        {
            throw ParseError("empty polynomial", m_pos);
        }
        bool first = true;
        while (!at_end())
        {
            double sign = 1.0;
            if (peek() == '+' || peek() == '-')
            {
                sign = (peek() == '-') ? -1.0 : 1.0;
                ++m_pos;
                skip_ws();
            }
            else if (!first)
            {
                throw ParseError("expected '+' or '-'", m_pos);
            }
            first = false;
            auto [e, c] = term();
            p.add_term(e, sign * c);
            skip_ws();
        }
        return p;
    }

private:
    std::pair<Exponent, double> term()
    {
        double coeff = 1.0;
        bool have_factor = false;
        std::vector<Exponent::Entry> entries;
        if (is_number_start())
        {
            coeff = number();
            have_factor = true;
            skip_ws();
            if (!at_end() && peek() == '*')
            {
                ++m_pos;
                skip_ws();
                entries.push_back(factor());
            }
        }
        else
        {
            entries.push_back(factor());
            have_factor = true;
        }
        skip_ws();
        while (!at_end() && peek() == '*')
        {
            ++m_pos;
            skip_ws();
            entries.push_back(factor());
            skip_ws();
        }
        if (!have_factor)
        {
            throw ParseError("expected term", m_pos);
        }
        return {Exponent(std::move(entries)), coeff};
    }

    Exponent::Entry factor()
    {
        if (at_end() || (peek() != 'x' && peek() != 'X'))
        {
            throw ParseError("expected variable 'x<index>'", m_pos);
        }
        const std::size_t start = m_pos;
        ++m_pos;
        const int idx = integer();
        if (idx < 1 || idx > m_n)
        {
            throw ParseError("variable x" + std::to_string(idx) + " outside [1, " +
                                 std::to_string(m_n) + "]",
                             start);
        }
        int pw = 1;
        skip_ws();
        if (!at_end() && peek() == '^')
        {
            ++m_pos;
            skip_ws();
            pw = integer();
        }
        return {idx - 1, pw};
    }

    int integer()
    {
        const std::size_t start = m_pos;
        int v = 0;
        auto res = std::from_chars(m_text.data() + m_pos, m_text.data() + m_text.size(), v);
        if (res.ec != std::errc{} || res.ptr == m_text.data() + start)
        {
            throw ParseError("expected integer", start);
        }
        m_pos = static_cast<std::size_t>(res.ptr - m_text.data());
        return v;
    }

    double number()
    {
        const std::size_t start = m_pos;
        double v = 0.0;
        auto res = std::from_chars(m_text.data() + m_pos, m_text.data() + m_text.size(), v);
        if (res.ec != std::errc{} || res.ptr == m_text.data() + start)
        {
            throw ParseError("expected number", start);
        }
        m_pos = static_cast<std::size_t>(res.ptr - m_text.data());
        return v;
    }

    bool is_number_start() const
    {
        if (at_end())
        {
            return false;
        }
        const char c = peek();
        return (c >= '0' && c <= '9') || c == '.';
    }

    void skip_ws()
    {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\n' || peek() == '\r'))
        {
            ++m_pos;
        }
    }

    bool at_end() const { return m_pos >= m_text.size(); }
    char peek() const { return m_text[m_pos]; }

    std::string_view m_text;
    int m_n;
    std::size_t m_pos = 0;
};

} // namespace

Polynomial parse_polynomial(std::string_view text, int n)
{
    if (n < 1)
    {
        throw InputError("variable count must be positive");
    }
    return PolyParser(text, n).parse();
}

//------------------------------------------------------------------------------
// SparseSum
//------------------------------------------------------------------------------

SparseSum::SparseSum(int n, std::vector<Summand> summands) : m_n(n), m_summands(std::move(summands))
{
    if (n < 1)
    {
        throw InputError("variable count must be positive");
    }
    for (std::size_t i = 0; i < m_summands.size(); ++i)
    {
        auto& s = m_summands[i];
        s.clique = make_clique(std::move(s.clique), n);
        if (s.poly.num_vars() != n)
        {
            s.poly = s.poly.with_num_vars(n);
        }
        for (const auto& t : s.poly.terms())
        {
            if (!t.first.supported_in(s.clique))
            {
                throw InputError("summand " + std::to_string(i + 1) + " has term " +
                                 t.first.to_string() + " outside its clique");
            }
        }
        const int deg = s.poly.degree();
        if (deg % 2 != 0)
        {
            throw InputError("summand " + std::to_string(i + 1) + " has odd degree " +
                             std::to_string(deg));
        }
        m_d = std::max(m_d, deg / 2);
    }
}

std::vector<Clique> SparseSum::cliques() const
{
    std::vector<Clique> c;
    c.reserve(m_summands.size());
    for (const auto& s : m_summands)
    {
        c.push_back(s.clique);
    }
    return c;
}

int SparseSum::half_degree(std::size_t i) const
{
    return m_summands.at(i).poly.degree() / 2;
}

std::size_t SparseSum::delta_norm() const noexcept
{
    std::size_t m = 0;
    for (const auto& s : m_summands)
    {
        m = std::max(m, s.clique.size());
    }
    return m;
}

double SparseSum::evaluate(std::span<const double> x) const
{
    if (static_cast<int>(x.size()) != m_n)
    {
        throw InputError("evaluation point has wrong dimension");
    }
    double sum = 0.0;
    for (const auto& s : m_summands)
    {
        sum += s.poly.evaluate(x);
    }
    return sum;
}

nlohmann::json SparseSum::to_json() const
{
    nlohmann::json j;
    j["n"] = m_n;
    auto arr = nlohmann::json::array();
    for (const auto& s : m_summands)
    {
        std::vector<int> one_based;
        for (int v : s.clique)
        {
            one_based.push_back(v + 1);
        }
        arr.push_back({{"clique", one_based}, {"poly", s.poly.to_string()}});
    }
    j["summands"] = std::move(arr);
    return j;
}

SparseSum SparseSum::from_json(const nlohmann::json& j)
{
    try
    {
        const int n = j.at("n").get<int>();
        std::vector<Summand> summands;
        for (const auto& s : j.at("summands"))
        {
            std::vector<int> vars;
            for (const auto& v : s.at("clique"))
            {
                vars.push_back(v.get<int>() - 1);
            }
            Summand sm;
            sm.clique = std::move(vars);
            sm.poly = parse_polynomial(s.at("poly").get<std::string>(), n);
            summands.push_back(std::move(sm));
        }
        return SparseSum(n, std::move(summands));
    }
    catch (const nlohmann::json::exception& e)
    {
        throw InputError(std::string("invalid SparseSum JSON: ") + e.what());
    }
}

Polynomial expand_total(const SparseSum& s)
{
    Polynomial total(s.num_vars());
    for (const auto& sm : s.summands())
    {
        total += sm.poly;
    }
    return total;
}

SparseSum monomial_decompose(const Polynomial& p)
{
    const int n = p.num_vars();
    const int deg = p.degree();
    if (deg % 2 != 0)
    {
        throw InputError("cannot decompose a polynomial of odd degree " + std::to_string(deg));
    }
    if (p.is_zero())
    {
        return SparseSum(n, {Summand{{0}, Polynomial(n)}});
    }
    if (deg > 0)
    {
        bool top_square = false;
        for (const auto& [e, c] : p.terms())
        {
            top_square = top_square || (e.degree() == deg && e.is_even());
        }
        if (!top_square)
        {
            throw InputError("top-degree form has no square monomial; polynomial is unbounded below");
        }
    }

    // Cliques ordered lexicographically on their sorted variable lists.
    std::map<Clique, Polynomial> groups;
    double constant = 0.0;
    std::vector<std::pair<Exponent, double>> others;
    for (const auto& [e, c] : p.terms())
    {
        if (e.is_zero())
        {
            constant = c;
        }
        else if (e.is_even())
        {
            auto [it, _] = groups.try_emplace(e.support(), n);
            it->second.add_term(e, c);
        }
        else
        {
            others.emplace_back(e, c);
        }
    }
    std::map<Clique, Polynomial> created;
    for (const auto& [e, c] : others)
    {
        const auto supp = e.support();
        auto covering = std::find_if(groups.begin(), groups.end(), [&](const auto& g) {
            return std::includes(g.first.begin(), g.first.end(), supp.begin(), supp.end());
        });
        if (covering != groups.end())
        {
            covering->second.add_term(e, c);
        }
        else
        {
            auto [it, _] = created.try_emplace(supp, n);
            it->second.add_term(e, c);
        }
    }
    std::vector<Summand> summands;
    for (auto& [cl, poly] : groups)
    {
        summands.push_back({cl, std::move(poly)});
    }
    for (auto& [key, created_poly] : created)
    {
        Clique cl = key;
        Polynomial poly = std::move(created_poly);
        // Absorb the square groups inside this support, then fall back to
        // joining an overlapping summand.
        for (auto& sm : summands)
        {
            if (poly.degree() % 2 == 0)
            {
                break;
            }
            if (!sm.poly.is_zero() && std::includes(cl.begin(), cl.end(), sm.clique.begin(), sm.clique.end()))
            {
                poly += sm.poly;
                sm.poly = Polynomial(n);
            }
        }
        for (auto& sm : summands)
        {
            if (poly.degree() % 2 == 0)
            {
                break;
            }
            Clique joint;
            std::set_union(cl.begin(), cl.end(), sm.clique.begin(), sm.clique.end(), std::back_inserter(joint));
            if (!sm.poly.is_zero() && joint.size() < cl.size() + sm.clique.size())
            {
                poly += sm.poly;
                sm.poly = Polynomial(n);
                cl = std::move(joint);
            }
        }
        if (poly.degree() % 2 != 0)
        {
            std::string vars;
            for (int v : cl)
            {
                vars += (vars.empty() ? "x" : ",x") + std::to_string(v + 1);
            }
            throw InputError("monomials supported on {" + vars +
                             "} cannot form an even-degree summand");
        }
        summands.push_back({cl, std::move(poly)});
    }
    std::erase_if(summands, [](const Summand& sm) { return sm.poly.is_zero(); });
    if (summands.empty())
    {
        summands.push_back({{0}, Polynomial(n)});
    }
    summands.front().poly.add_term(Exponent{}, constant);
    return SparseSum(n, std::move(summands));
}

//------------------------------------------------------------------------------
// csp graph and running intersection
//------------------------------------------------------------------------------

bool CspGraph::has_edge(int i, int j) const
{
    if (i > j)
    {
        std::swap(i, j);
    }
    return std::binary_search(edges.begin(), edges.end(), std::make_pair(i, j));
}

CspGraph csp_graph(const SparseSum& s)
{
    std::set<std::pair<int, int>> e;
    for (const auto& sm : s.summands())
    {
        for (const auto& t : sm.poly.terms())
        {
            const auto supp = t.first.support();
            for (std::size_t a = 0; a < supp.size(); ++a)
            {
                for (std::size_t b = a + 1; b < supp.size(); ++b)
                {
                    e.emplace(supp[a], supp[b]);
                }
            }
        }
    }
    return CspGraph{s.num_vars(), {e.begin(), e.end()}};
}

namespace
{

struct RipSearch
{
    std::span<const Clique> cliques;
    bool strict;
    long budget; // < 0: unlimited
    long nodes = 0;
    bool exhausted = false;
    std::vector<std::size_t> order{};
    std::vector<bool> used{};
    std::vector<int> in_union{}; // multiplicity of each variable in the prefix union

    bool admissible(std::size_t cand) const
    {
        Clique inter;
        for (int v : cliques[cand])
        {
            if (static_cast<std::size_t>(v) < in_union.size() && in_union[static_cast<std::size_t>(v)] > 0)
            {
                inter.push_back(v);
            }
        }
        for (std::size_t k : order)
        {
            const Clique& ck = cliques[k];
            if (std::includes(ck.begin(), ck.end(), inter.begin(), inter.end()) &&
                (!strict || inter.size() < ck.size()))
            {
                return true;
            }
        }
        return false;
    }

    std::size_t overlap(std::size_t cand) const
    {
        std::size_t o = 0;
        for (int v : cliques[cand])
        {
            if (static_cast<std::size_t>(v) < in_union.size() && in_union[static_cast<std::size_t>(v)] > 0)
            {
                ++o;
            }
        }
        return o;
    }

    void push(std::size_t c)
    {
        order.push_back(c);
        used[c] = true;
        for (int v : cliques[c])
        {
            ++in_union[static_cast<std::size_t>(v)];
        }
    }

    void pop()
    {
        const std::size_t c = order.back();
        order.pop_back();
        used[c] = false;
        for (int v : cliques[c])
        {
            --in_union[static_cast<std::size_t>(v)];
        }
    }

    bool dfs()
    {
        if (order.size() == cliques.size())
        {
            return true;
        }
        if (budget >= 0 && ++nodes > budget)
        {
            exhausted = true;
            return false;
        }
        std::vector<std::size_t> cand;
        for (std::size_t c = 0; c < cliques.size(); ++c)
        {
            if (!used[c] && (order.empty() || admissible(c)))
            {
                cand.push_back(c);
            }
        }
        std::stable_sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
            return overlap(a) > overlap(b);
        });
        for (std::size_t c : cand)
        {
            push(c);
            if (dfs())
            {
                return true;
            }
            pop();
            if (exhausted)
            {
                return false;
            }
        }
        return false;
    }
};

} // namespace

RipResult rip_check(std::span<const Clique> cliques)
{
    RipResult res;
    if (cliques.empty())
    {
        throw InputError("rip_check needs at least one clique");
    }
    int maxvar = 0;
    for (const auto& c : cliques)
    {
        if (c.empty())
        {
            throw InputError("rip_check: empty clique");
        }
        maxvar = std::max(maxvar, c.back());
    }
    const long budget = cliques.size() <= 8 ? -1 : 200000;
    auto run = [&](bool strict, bool& found, bool& determined) {
        RipSearch s{cliques, strict, budget};
        s.used.assign(cliques.size(), false);
        s.in_union.assign(static_cast<std::size_t>(maxvar) + 1, 0);
        found = s.dfs();
        determined = found || !s.exhausted;
        return s.order;
    };
    bool det_strict = true;
    bool det_nonstrict = true;
    auto order_strict = run(true, res.strict, det_strict);
    if (res.strict)
    {
        res.nonstrict = true;
        res.order = std::move(order_strict);
    }
    else
    {
        auto order_ns = run(false, res.nonstrict, det_nonstrict);
        if (res.nonstrict)
        {
            res.order = std::move(order_ns);
        }
    }
    res.determined = det_strict && det_nonstrict;
    return res;
}

//------------------------------------------------------------------------------
// Newton half-support
//------------------------------------------------------------------------------

std::vector<Exponent> hull_lattice_points(std::span<const Exponent> generators, const Clique& clique)
{
    if (generators.empty())
    {
        throw InputError("empty generator set");
    }
    const std::size_t dim = clique.size();
    std::vector<std::vector<double>> gens;
    std::vector<int> lo(dim, 0);
    std::vector<int> hi(dim, 0);
    bool first = true;
    for (const auto& g : generators)
    {
        if (!g.supported_in(clique))
        {
            throw InputError("generator outside clique");
        }
        std::vector<double> v(dim);
        for (std::size_t k = 0; k < dim; ++k)
        {
            const int p = g.power(clique[k]);
            v[k] = p;
            lo[k] = first ? p : std::min(lo[k], p);
            hi[k] = first ? p : std::max(hi[k], p);
        }
        first = false;
        gens.push_back(std::move(v));
    }
    std::set<Exponent, GradedLex> result(generators.begin(), generators.end());
    std::vector<int> cur(lo);
    std::vector<double> pt(dim);
    while (true)
    {
        std::vector<Exponent::Entry> entries;
        for (std::size_t k = 0; k < dim; ++k)
        {
            pt[k] = cur[k];
            entries.emplace_back(clique[k], cur[k]);
        }
        Exponent e(std::move(entries));
        if (!result.contains(e) && detail::hull_contains(gens, pt))
        {
            result.insert(std::move(e));
        }
        std::size_t k = 0;
        while (k < dim && cur[k] == hi[k])
        {
            cur[k] = lo[k];
            ++k;
        }
        if (k == dim)
        {
            break;
        }
        ++cur[k];
    }
    return {result.begin(), result.end()};
}

std::vector<Exponent> newton_half_support(const Polynomial& f, const Clique& clique)
{
    if (f.is_zero())
    {
        throw InputError("newton_half_support of the zero polynomial");
    }
    if (f.degree() % 2 != 0)
    {
        throw InputError("newton_half_support needs even degree");
    }
    std::vector<Exponent> gens;
    for (const auto& [e, c] : f.terms())
    {
        if (!e.supported_in(clique))
        {
            throw InputError("polynomial term " + e.to_string() + " outside clique");
        }
        if (e.is_even())
        {
            std::vector<Exponent::Entry> half;
            for (const auto& [v, p] : e.entries())
            {
                half.emplace_back(v, p / 2);
            }
            gens.emplace_back(std::move(half));
        }
    }
    if (gens.empty())
    {
        throw InputError("polynomial has no square monomial; Newton half-support is empty");
    }
    return hull_lattice_points(gens, clique);
}

} // namespace sparsesos
