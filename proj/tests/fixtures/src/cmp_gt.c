#include <stdio.h>

int main(void) {
  int x = getchar() - 'a';
  if (x>0)
    return 1;
  return 0;
}
