#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace stkgqa {

// Complex vector stored as parallel real/imaginary arrays.
struct ComplexVector {
    std::vector<double> re;
    std::vector<double> im;

    ComplexVector() = default;
    ComplexVector(std::vector<double> r, std::vector<double> i)
        : re(std::move(r)), im(std::move(i)) {
        if (re.size() != im.size())
            throw std::invalid_argument("re/im length mismatch");
    }

    size_t dim() const { return re.size(); }

    // Multiplicative identity: scores through an all-ones factor are
    // unchanged, which is how facts lacking a timestamp or location enter
    // the model.
    static ComplexVector ones(size_t d) {
        return ComplexVector(std::vector<double>(d, 1.0), std::vector<double>(d, 0.0));
    }

    // Packed layout [re..., im...] used by table rows and the question
    // encoder's slot injection.
    std::vector<double> flattened() const {
        std::vector<double> out;
        out.reserve(2 * dim());
        out.insert(out.end(), re.begin(), re.end());
        out.insert(out.end(), im.begin(), im.end());
        return out;
    }
};

namespace detail {
inline void require_dim(size_t a, size_t b) {
    if (a != b) throw std::invalid_argument("complex vector dimension mismatch");
}
}  // namespace detail

// Re(<es, r, conj(eo)>)
inline double score_complex(const ComplexVector& es, const ComplexVector& r,
                            const ComplexVector& eo) {
    detail::require_dim(es.dim(), r.dim());
    detail::require_dim(es.dim(), eo.dim());
    double sum = 0.0;
    for (size_t d = 0; d < es.dim(); ++d) {
        double are = es.re[d] * r.re[d] - es.im[d] * r.im[d];
        double aim = es.re[d] * r.im[d] + es.im[d] * r.re[d];
        sum += are * eo.re[d] + aim * eo.im[d];
    }
    return sum;
}

// Re(<es, r ⊙ t, conj(eo)>)
inline double score_tcomplex(const ComplexVector& es, const ComplexVector& r,
                             const ComplexVector& eo, const ComplexVector& t) {
    detail::require_dim(r.dim(), t.dim());
    ComplexVector rt;
    rt.re.resize(r.dim());
    rt.im.resize(r.dim());
    for (size_t d = 0; d < r.dim(); ++d) {
        rt.re[d] = r.re[d] * t.re[d] - r.im[d] * t.im[d];
        rt.im[d] = r.re[d] * t.im[d] + r.im[d] * t.re[d];
    }
    return score_complex(es, rt, eo);
}

// Re(<es, r ⊙ t ⊙ l, conj(eo)>)
inline double score_stcomplex(const ComplexVector& es, const ComplexVector& r,
                              const ComplexVector& eo, const ComplexVector& t,
                              const ComplexVector& l) {
    detail::require_dim(t.dim(), l.dim());
    ComplexVector tl;
    tl.re.resize(t.dim());
    tl.im.resize(t.dim());
    for (size_t d = 0; d < t.dim(); ++d) {
        tl.re[d] = t.re[d] * l.re[d] - t.im[d] * l.im[d];
        tl.im[d] = t.re[d] * l.im[d] + t.im[d] * l.re[d];
    }
    return score_tcomplex(es, r, eo, tl);
}

}  // namespace stkgqa
