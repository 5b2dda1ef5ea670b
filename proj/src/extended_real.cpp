#include "mgdual/extended_real.hpp"

namespace mgdual {

std::ostream& operator<<(std::ostream& os, ExtendedReal a) {
    if (a.is_neg_inf()) return os << "-inf";
    if (a.is_pos_inf()) return os << "+inf";
    return os << a.value();
}

}  // namespace mgdual
