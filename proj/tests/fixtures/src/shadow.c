#include <stdio.h>

int level = 4;

int main(void) {
  int level = getchar();
  if (level > 'k')
    return 1;
  return 0;
}
