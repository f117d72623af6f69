from django.contrib import admin
from django.urls import path, include
from rest_framework.routers import DefaultRouter
from rest_framework.authtoken import views as authtoken_views

from beamalign.views import ExecucaoViewSet, ExperimentoViewSet

# ============================================
# ROUTER
# ============================================
router = DefaultRouter()

router.register(r'experimentos', ExperimentoViewSet, basename='experimento')
router.register(r'execucoes', ExecucaoViewSet, basename='execucao')

# ============================================
# URL PATTERNS
# ============================================
urlpatterns = [
    # Django Admin
    path('admin/', admin.site.urls),

    # ============ API PRINCIPAL ============
    path('api/', include(router.urls)),

    # ============ DRF PADRÃO ============
    path('api-auth/', include('rest_framework.urls')),
    path('api-token-auth/', authtoken_views.obtain_auth_token, name='api-token-auth'),
]
