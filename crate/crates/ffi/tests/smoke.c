#include <stdio.h>
#include <string.h>
#include "slangchoice.h"

int main(void) {
    size_t ranks[3] = {1, 1, 1};
    double auc = 0.0;
    if (sc_auc(ranks, 3, 10, &auc) != SC_STATUS_OK || auc != 100.0) {
        fprintf(stderr, "auc %f\n", auc);
        return 1;
    }
    ScLexicon *lex = NULL;
    if (sc_lexicon_read("/nonexistent/lexicon.jsonl", &lex) != SC_STATUS_IO || lex != NULL) {
        return 2;
    }
    const char *msg = sc_last_error();
    if (msg == NULL || strstr(msg, "nonexistent") == NULL) {
        return 3;
    }
    printf("%s\n", sc_version());
    return 0;
}
