// Built-in connective inventory; mirrors data/pdtb_connectives.tsv.

#include "eventbert/discourse.h"

namespace eventbert {

const char* builtin_lexicon_tsv() {
  return R"TSV(# Discourse connectives with top-level relation categories.
# surface<TAB>category
after	TEMPORAL
afterward	TEMPORAL
afterwards	TEMPORAL
as	TEMPORAL
as soon as	TEMPORAL
at the same time	TEMPORAL
before	TEMPORAL
by then	TEMPORAL
earlier	TEMPORAL
eventually	TEMPORAL
finally	TEMPORAL
in the end	TEMPORAL
in the meantime	TEMPORAL
later	TEMPORAL
meanwhile	TEMPORAL
next	TEMPORAL
once	TEMPORAL
previously	TEMPORAL
simultaneously	TEMPORAL
since then	TEMPORAL
subsequently	TEMPORAL
then	TEMPORAL
thereafter	TEMPORAL
till	TEMPORAL
until	TEMPORAL
when	TEMPORAL
whenever	TEMPORAL
ultimately	TEMPORAL
as long as	TEMPORAL
by the time	TEMPORAL
now that	TEMPORAL
accordingly	CONTINGENCY
as a result	CONTINGENCY
as a consequence	CONTINGENCY
because	CONTINGENCY
consequently	CONTINGENCY
hence	CONTINGENCY
if	CONTINGENCY
in turn	CONTINGENCY
only if	CONTINGENCY
so	CONTINGENCY
so that	CONTINGENCY
therefore	CONTINGENCY
thus	CONTINGENCY
thereby	CONTINGENCY
unless	CONTINGENCY
since	CONTINGENCY
for that reason	CONTINGENCY
in that case	CONTINGENCY
if and when	CONTINGENCY
even if	CONTINGENCY
lest	CONTINGENCY
so as	CONTINGENCY
although	COMPARISON
but	COMPARISON
by comparison	COMPARISON
by contrast	COMPARISON
conversely	COMPARISON
even though	COMPARISON
however	COMPARISON
in contrast	COMPARISON
nevertheless	COMPARISON
nonetheless	COMPARISON
on the contrary	COMPARISON
on the other hand	COMPARISON
rather	COMPARISON
still	COMPARISON
though	COMPARISON
whereas	COMPARISON
while	COMPARISON
yet	COMPARISON
even so	COMPARISON
regardless	COMPARISON
much as	COMPARISON
even as	COMPARISON
additionally	EXPANSION
also	EXPANSION
alternatively	EXPANSION
and	EXPANSION
as well	EXPANSION
besides	EXPANSION
for example	EXPANSION
for instance	EXPANSION
further	EXPANSION
furthermore	EXPANSION
in addition	EXPANSION
in fact	EXPANSION
in other words	EXPANSION
in particular	EXPANSION
indeed	EXPANSION
instead	EXPANSION
likewise	EXPANSION
moreover	EXPANSION
or	EXPANSION
otherwise	EXPANSION
particularly	EXPANSION
separately	EXPANSION
similarly	EXPANSION
specifically	EXPANSION
in short	EXPANSION
in sum	EXPANSION
overall	EXPANSION
except	EXPANSION
namely	EXPANSION
nor	EXPANSION
in general	EXPANSION
)TSV";
}

}  // namespace eventbert
